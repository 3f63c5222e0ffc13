#ifndef HEATBASIS_COMMON_HPP
#define HEATBASIS_COMMON_HPP

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace heatbasis {

// Error taxonomy. The CLI maps these onto exit codes:
//   VerificationError -> 1, ConfigError/DataError -> 2, ResolutionExhausted -> 3.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

struct DataError : std::runtime_error {
    explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

struct DomainError : std::runtime_error {
    explicit DomainError(const std::string& msg) : std::runtime_error(msg) {}
};

struct IndexError : std::out_of_range {
    explicit IndexError(const std::string& msg) : std::out_of_range(msg) {}
};

struct InternalError : std::logic_error {
    explicit InternalError(const std::string& msg) : std::logic_error(msg) {}
};

struct ResolutionExhausted : std::runtime_error {
    explicit ResolutionExhausted(const std::string& msg) : std::runtime_error(msg) {}
};

struct VerificationError : std::runtime_error {
    explicit VerificationError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Seedable generator used for every randomized quantity in the library.
/// Doubles are drawn from the top 53 bits of mt19937_64, so two runs with the
/// same seed produce bit-identical sequences on any platform.
class Rng {
public:
    static constexpr const char* name() { return "mt19937_64/u53"; }

    explicit Rng(std::uint64_t seed) : seed_(seed), gen_(seed) {}

    /// Derive an independent stream for a named purpose (FNV-1a of the tag).
    Rng fork(const std::string& tag) const {
        std::uint64_t h = 1469598103934665603ull;
        for (unsigned char c : tag) {
            h ^= c;
            h *= 1099511628211ull;
        }
        return Rng(seed_ ^ h);
    }

    std::uint64_t bits() { return gen_(); }

    /// Uniform in [0,1) with 53-bit resolution.
    double u01() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    double uniform(double a, double b) { return a + (b - a) * u01(); }

    /// Uniform integer in [0, n).
    std::size_t index(std::size_t n) { return static_cast<std::size_t>(gen_() % n); }

private:
    std::uint64_t seed_;
    std::mt19937_64 gen_;
};

} // namespace heatbasis

#endif
