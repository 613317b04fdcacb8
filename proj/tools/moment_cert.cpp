#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"

#include "momcert/cli.hpp"

namespace {

int emit(const std::string& document, const std::optional<std::string>& path) {
    if (!path) {
        std::cout << document;
        return 0;
    }
    std::ofstream out(*path, std::ios::binary);
    if (!out) {
        std::cerr << "moment_cert: cannot write " << *path << "\n";
        return 2;
    }
    out << document;
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Certified bounds on moments of sums of independent random variables"};
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> format;
    std::optional<std::string> out_path;
    app.add_option("--config", config_path, "JSON configuration document")->required();
    app.add_option("--seed", seed, "overrides the configured seed");
    app.add_option("--format", format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
    app.add_option("--out", out_path, "output file (default standard output)");
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    momcert::cli::RunConfig cfg;
    try {
        std::ifstream in(config_path);
        if (!in) throw momcert::cli::ConfigError("cannot open " + config_path);
        std::stringstream text;
        text << in.rdbuf();
        cfg = momcert::cli::parse_config_text(text.str());
        if (seed) cfg.seed = *seed;
        if (format) cfg.output_format = *format;
        if (out_path) cfg.output_path = *out_path;
    } catch (const momcert::cli::ConfigError& e) {
        std::cerr << "moment_cert: " << e.what() << "\n";
        return 2;
    }

    try {
        const auto result = momcert::cli::run(cfg);
        if (const int rc = emit(result.document, cfg.output_path); rc != 0) return rc;
        if (!result.diagnostics.empty()) std::cerr << "moment_cert: " << result.diagnostics << "\n";
        return static_cast<int>(result.code);
    } catch (const momcert::cli::ConfigError& e) {
        std::cerr << "moment_cert: " << e.what() << "\n";
        return 2;
    } catch (const momcert::Refusal& e) {
        std::cerr << "moment_cert: refused: " << e.what() << "\n";
        return 1;
    } catch (const std::invalid_argument& e) {
        std::cerr << "moment_cert: " << e.what() << "\n";
        return 2;
    }
}
