#pragma once

// Single random variables: closed-form moments, characteristic functions,
// seeded samplers and structural flags for the supported families.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <type_traits>
#include <variant>
#include <vector>

#include "momcert/common.hpp"

namespace momcert {

/// Moments E X^l for l = 0..max_order of one variable.
class MomentProfile {
public:
    MomentProfile(std::vector<double> moments, bool symmetric, bool centered)
        : moments_(std::move(moments)), symmetric_(symmetric), centered_(centered) {
        validate();
    }

    int max_order() const { return static_cast<int>(moments_.size()) - 1; }
    double operator[](int l) const { return moments_.at(static_cast<std::size_t>(l)); }
    std::span<const double> moments() const { return moments_; }
    bool symmetric() const { return symmetric_; }
    bool centered() const { return centered_; }
    double variance() const { return moments_[2]; }

    /// The leading part up to order l.
    MomentProfile truncated(int l) const {
        if (l > max_order()) throw std::invalid_argument("cannot extend a moment profile");
        return MomentProfile({moments_.begin(), moments_.begin() + l + 1}, symmetric_, centered_);
    }

private:
    void validate() const {
        if (moments_.size() < 3)
            throw std::invalid_argument("moment profile needs max_order >= 2");
        for (double m : moments_)
            if (!std::isfinite(m)) throw std::invalid_argument("moment profile has a non-finite entry");
        if (moments_[0] != 1.0) throw std::invalid_argument("moment profile must have mu_0 = 1");
        const double var = moments_[2];
        if (!(var > 0.0)) throw std::invalid_argument("variance must be positive");
        const double sd = std::sqrt(var);
        const double eps = 1e-12;
        if (centered_ && std::abs(moments_[1]) > eps * sd)
            throw std::invalid_argument("centered profile has nonzero mean");
        for (int l = 1; l <= max_order(); ++l) {
            const double scale = std::pow(sd, l);
            if (l % 2 == 1) {
                if (symmetric_ && std::abs(moments_[l]) > eps * scale)
                    throw std::invalid_argument("symmetric profile has nonzero odd moment of order " +
                                                std::to_string(l));
            } else if (!(moments_[l] > 0.0)) {
                throw std::invalid_argument("even moment of order " + std::to_string(l) +
                                            " must be positive");
            }
        }
        // Lyapunov: ||X||_{2a} is nondecreasing in a.
        double previous = sd;
        for (int l = 4; l <= max_order(); l += 2) {
            const double norm = std::pow(moments_[l], 1.0 / l);
            if (norm < previous * (1.0 - 1e-12))
                throw std::invalid_argument("moments violate the Lyapunov chain at order " +
                                            std::to_string(l));
            previous = std::max(previous, norm);
        }
    }

    std::vector<double> moments_;
    bool symmetric_;
    bool centered_;
};

/// Builds the profile of a finitely supported law. Symmetry and centering
/// are detected from the computed moments.
inline MomentProfile profile_from_atoms(std::span<const double> values, std::span<const double> probs,
                                        int max_order) {
    if (values.size() != probs.size() || values.empty())
        throw std::invalid_argument("atoms need matching, non-empty value and probability lists");
    double total = 0.0;
    for (double p : probs) {
        if (!(p >= 0.0)) throw std::invalid_argument("atom probabilities must be non-negative");
        total += p;
    }
    if (std::abs(total - 1.0) > 1e-12) throw std::invalid_argument("atom probabilities must sum to 1");
    std::vector<double> m(static_cast<std::size_t>(max_order) + 1, 0.0);
    for (std::size_t i = 0; i < values.size(); ++i) {
        double power = 1.0;
        for (int l = 0; l <= max_order; ++l) {
            m[l] += probs[i] * power;
            power *= values[i];
        }
    }
    m[0] = 1.0;
    const double sd = std::sqrt(std::max(m[2], 0.0));
    const bool centered = std::abs(m[1]) <= 1e-12 * sd;
    if (centered) m[1] = 0.0;
    bool symmetric = centered;
    for (int l = 3; l <= max_order && symmetric; l += 2)
        symmetric = std::abs(m[l]) <= 1e-12 * std::pow(sd, l);
    if (symmetric)
        for (int l = 1; l <= max_order; l += 2) m[l] = 0.0;
    return MomentProfile(std::move(m), symmetric, centered);
}

namespace family {
struct Gaussian { double sigma; };
struct Rademacher { double sigma; };
/// Laplace law with standard deviation sigma.
struct SymmetricExponential { double sigma; };
/// Uniform on [-a, a].
struct Uniform { double a; };
/// Values -b, 0, b with probabilities q, 1 - 2q, q.
struct SymmetricThreePoint { double b; double q; };
struct RawMoments { MomentProfile profile; };
}  // namespace family

/// A single variable: a family with parameters, or a bare moment profile.
class VariableSpec {
public:
    using Law = std::variant<family::Gaussian, family::Rademacher, family::SymmetricExponential,
                             family::Uniform, family::SymmetricThreePoint, family::RawMoments>;

    static VariableSpec gaussian(double sigma) { return VariableSpec(family::Gaussian{positive(sigma, "sigma")}); }
    static VariableSpec rademacher(double sigma) { return VariableSpec(family::Rademacher{positive(sigma, "sigma")}); }
    static VariableSpec symmetric_exponential(double sigma) {
        return VariableSpec(family::SymmetricExponential{positive(sigma, "sigma")});
    }
    static VariableSpec uniform(double a) { return VariableSpec(family::Uniform{positive(a, "a")}); }
    static VariableSpec symmetric_three_point(double b, double q) {
        if (!(q > 0.0 && q <= 0.5)) throw std::invalid_argument("three-point q must lie in (0, 1/2]");
        return VariableSpec(family::SymmetricThreePoint{positive(b, "b"), q});
    }
    static VariableSpec raw_moments(MomentProfile profile) {
        return VariableSpec(family::RawMoments{std::move(profile)});
    }

    const Law& law() const { return law_; }

    std::string family_name() const {
        return std::visit(
            [](const auto& f) -> std::string {
                using F = std::decay_t<decltype(f)>;
                if constexpr (std::is_same_v<F, family::Gaussian>) return "gaussian";
                else if constexpr (std::is_same_v<F, family::Rademacher>) return "rademacher";
                else if constexpr (std::is_same_v<F, family::SymmetricExponential>) return "symmetric_exponential";
                else if constexpr (std::is_same_v<F, family::Uniform>) return "uniform";
                else if constexpr (std::is_same_v<F, family::SymmetricThreePoint>) return "symmetric_three_point";
                else return "raw_moments";
            },
            law_);
    }

    bool is_raw() const { return std::holds_alternative<family::RawMoments>(law_); }

    /// True for the families whose tail t -> ln P(|X| >= t) is concave.
    bool log_concave_tail() const {
        return std::holds_alternative<family::Gaussian>(law_) ||
               std::holds_alternative<family::Rademacher>(law_) ||
               std::holds_alternative<family::SymmetricExponential>(law_) ||
               std::holds_alternative<family::Uniform>(law_);
    }

    bool symmetric() const {
        if (const auto* raw = std::get_if<family::RawMoments>(&law_)) return raw->profile.symmetric();
        return true;
    }

    bool centered() const {
        if (const auto* raw = std::get_if<family::RawMoments>(&law_)) return raw->profile.centered();
        return true;
    }

    double variance() const {
        return std::visit(
            [](const auto& f) -> double {
                using F = std::decay_t<decltype(f)>;
                if constexpr (std::is_same_v<F, family::Uniform>) return f.a * f.a / 3.0;
                else if constexpr (std::is_same_v<F, family::SymmetricThreePoint>) return 2.0 * f.q * f.b * f.b;
                else if constexpr (std::is_same_v<F, family::RawMoments>) return f.profile.variance();
                else return f.sigma * f.sigma;
            },
            law_);
    }

    /// Same family rescaled to the requested variance.
    VariableSpec with_variance(double target) const {
        const double c = std::sqrt(positive(target, "variance") / variance());
        return std::visit(
            [c](const auto& f) -> VariableSpec {
                using F = std::decay_t<decltype(f)>;
                if constexpr (std::is_same_v<F, family::Uniform>) return uniform(f.a * c);
                else if constexpr (std::is_same_v<F, family::SymmetricThreePoint>) return symmetric_three_point(f.b * c, f.q);
                else if constexpr (std::is_same_v<F, family::RawMoments>) {
                    std::vector<double> m(f.profile.moments().begin(), f.profile.moments().end());
                    double scale = 1.0;
                    for (auto& v : m) { v *= scale; scale *= c; }
                    return raw_moments(MomentProfile(std::move(m), f.profile.symmetric(), f.profile.centered()));
                } else return VariableSpec(F{f.sigma * c});
            },
            law_);
    }

    /// Atoms (value, probability) for finitely supported families.
    std::optional<std::vector<std::pair<double, double>>> atoms() const {
        if (const auto* r = std::get_if<family::Rademacher>(&law_))
            return std::vector<std::pair<double, double>>{{-r->sigma, 0.5}, {r->sigma, 0.5}};
        if (const auto* t = std::get_if<family::SymmetricThreePoint>(&law_)) {
            std::vector<std::pair<double, double>> a{{-t->b, t->q}};
            if (t->q < 0.5) a.emplace_back(0.0, 1.0 - 2.0 * t->q);
            a.emplace_back(t->b, t->q);
            return a;
        }
        return std::nullopt;
    }

private:
    explicit VariableSpec(Law law) : law_(std::move(law)) {}

    static double positive(double v, const char* name) {
        if (!(v > 0.0) || !std::isfinite(v))
            throw std::invalid_argument(std::string(name) + " must be a positive finite number");
        return v;
    }

    Law law_;
};

/// Exact moment sequence up to order L.
inline MomentProfile moments_of(const VariableSpec& spec, int L) {
    if (L < 2) throw std::invalid_argument("moment order must be at least 2");
    if (const auto* raw = std::get_if<family::RawMoments>(&spec.law())) {
        if (raw->profile.max_order() < L)
            throw std::invalid_argument("raw profile only provides moments up to order " +
                                        std::to_string(raw->profile.max_order()));
        return raw->profile.truncated(L);
    }
    std::vector<double> m(static_cast<std::size_t>(L) + 1, 0.0);
    m[0] = 1.0;
    for (int l = 2; l <= L; l += 2) {
        const int h = l / 2;
        m[l] = std::visit(
            [l, h](const auto& f) -> double {
                using F = std::decay_t<decltype(f)>;
                if constexpr (std::is_same_v<F, family::Gaussian>) {
                    double dfact = 1.0;
                    for (int j = l - 1; j > 1; j -= 2) dfact *= j;
                    return dfact * std::pow(f.sigma, l);
                } else if constexpr (std::is_same_v<F, family::Rademacher>) {
                    return std::pow(f.sigma, l);
                } else if constexpr (std::is_same_v<F, family::SymmetricExponential>) {
                    return factorial(l) / std::ldexp(1.0, h) * std::pow(f.sigma, l);
                } else if constexpr (std::is_same_v<F, family::Uniform>) {
                    return std::pow(f.a, l) / (l + 1);
                } else if constexpr (std::is_same_v<F, family::SymmetricThreePoint>) {
                    return 2.0 * f.q * std::pow(f.b, l);
                } else {
                    return 0.0;
                }
            },
            spec.law());
    }
    return MomentProfile(std::move(m), true, true);
}

/// phi_X(t) = E cos(tX); every non-raw family is symmetric so this is real.
inline double charfn_of(const VariableSpec& spec, double t) {
    return std::visit(
        [t](const auto& f) -> double {
            using F = std::decay_t<decltype(f)>;
            if constexpr (std::is_same_v<F, family::Gaussian>) {
                const double s = f.sigma * t;
                return std::exp(-0.5 * s * s);
            } else if constexpr (std::is_same_v<F, family::Rademacher>) {
                return std::cos(f.sigma * t);
            } else if constexpr (std::is_same_v<F, family::SymmetricExponential>) {
                const double s = f.sigma * t;
                return 1.0 / (1.0 + 0.5 * s * s);
            } else if constexpr (std::is_same_v<F, family::Uniform>) {
                const double x = f.a * t;
                if (std::abs(x) < 1e-4) return 1.0 - x * x / 6.0 + x * x * x * x / 120.0;
                return std::sin(x) / x;
            } else if constexpr (std::is_same_v<F, family::SymmetricThreePoint>) {
                return 1.0 - 2.0 * f.q + 2.0 * f.q * std::cos(f.b * t);
            } else {
                throw Refusal("no characteristic function available for a raw moment profile");
            }
        },
        spec.law());
}

/// Per-shard generator for one variable. Streams are keyed by (seed, shard).
class Sampler {
public:
    Sampler(VariableSpec spec, std::uint64_t seed, std::uint64_t shard = 0) : spec_(std::move(spec)) {
        if (spec_.is_raw()) throw Refusal("cannot sample a raw moment profile");
        std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                          static_cast<std::uint32_t>(shard), static_cast<std::uint32_t>(shard >> 32)};
        engine_.seed(seq);
    }

    double operator()() { return draw(spec_, engine_); }

    /// Draws from an arbitrary spec using a caller-owned engine.
    static double draw(const VariableSpec& spec, std::mt19937_64& engine) {
        return std::visit(
            [&engine](const auto& f) -> double {
                using F = std::decay_t<decltype(f)>;
                std::uniform_real_distribution<double> unit(0.0, 1.0);
                if constexpr (std::is_same_v<F, family::Gaussian>) {
                    return f.sigma * std::normal_distribution<double>(0.0, 1.0)(engine);
                } else if constexpr (std::is_same_v<F, family::Rademacher>) {
                    return (engine() >> 63) ? f.sigma : -f.sigma;
                } else if constexpr (std::is_same_v<F, family::SymmetricExponential>) {
                    const double e = std::exponential_distribution<double>(1.0)(engine);
                    const double mag = e * f.sigma / std::numbers::sqrt2;
                    return (engine() >> 63) ? mag : -mag;
                } else if constexpr (std::is_same_v<F, family::Uniform>) {
                    return f.a * (2.0 * unit(engine) - 1.0);
                } else if constexpr (std::is_same_v<F, family::SymmetricThreePoint>) {
                    const double u = unit(engine);
                    if (u < f.q) return -f.b;
                    if (u < 2.0 * f.q) return f.b;
                    return 0.0;
                } else {
                    throw Refusal("cannot sample a raw moment profile");
                }
            },
            spec.law());
    }

private:
    VariableSpec spec_;
    std::mt19937_64 engine_;
};

inline std::vector<double> sample(const VariableSpec& spec, std::uint64_t seed, std::size_t count) {
    if (count < 1) throw std::invalid_argument("sample count must be at least 1");
    Sampler sampler(spec, seed);
    std::vector<double> out(count);
    for (auto& x : out) x = sampler();
    return out;
}

}  // namespace momcert
