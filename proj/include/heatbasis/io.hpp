#ifndef HEATBASIS_IO_HPP
#define HEATBASIS_IO_HPP

#include <algorithm>
#include <array>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "heatbasis/annihilate.hpp"
#include "heatbasis/heat.hpp"

namespace heatbasis {

using json = nlohmann::ordered_json;

// ---------------------------------------------------------------- sha-256

namespace detail {

struct Sha256 {
    std::uint32_t h[8] = {0x6a09e667u, 0xbb67ae85u, 0x3c6ef372u, 0xa54ff53au,
                          0x510e527fu, 0x9b05688cu, 0x1f83d9abu, 0x5be0cd19u};
    std::uint64_t total = 0;
    std::array<unsigned char, 64> buf{};
    std::size_t fill = 0;

    static std::uint32_t rotr(std::uint32_t x, int n) { return (x >> n) | (x << (32 - n)); }

    void block(const unsigned char* p) {
        static const std::uint32_t k[64] = {
            0x428a2f98, 0x71374491, 0xb5c0fbcf, 0xe9b5dba5, 0x3956c25b, 0x59f111f1, 0x923f82a4,
            0xab1c5ed5, 0xd807aa98, 0x12835b01, 0x243185be, 0x550c7dc3, 0x72be5d74, 0x80deb1fe,
            0x9bdc06a7, 0xc19bf174, 0xe49b69c1, 0xefbe4786, 0x0fc19dc6, 0x240ca1cc, 0x2de92c6f,
            0x4a7484aa, 0x5cb0a9dc, 0x76f988da, 0x983e5152, 0xa831c66d, 0xb00327c8, 0xbf597fc7,
            0xc6e00bf3, 0xd5a79147, 0x06ca6351, 0x14292967, 0x27b70a85, 0x2e1b2138, 0x4d2c6dfc,
            0x53380d13, 0x650a7354, 0x766a0abb, 0x81c2c92e, 0x92722c85, 0xa2bfe8a1, 0xa81a664b,
            0xc24b8b70, 0xc76c51a3, 0xd192e819, 0xd6990624, 0xf40e3585, 0x106aa070, 0x19a4c116,
            0x1e376c08, 0x2748774c, 0x34b0bcb5, 0x391c0cb3, 0x4ed8aa4a, 0x5b9cca4f, 0x682e6ff3,
            0x748f82ee, 0x78a5636f, 0x84c87814, 0x8cc70208, 0x90befffa, 0xa4506ceb, 0xbef9a3f7,
            0xc67178f2};
        std::uint32_t w[64];
        for (int i = 0; i < 16; ++i)
            w[i] = (std::uint32_t(p[4 * i]) << 24) | (std::uint32_t(p[4 * i + 1]) << 16) |
                   (std::uint32_t(p[4 * i + 2]) << 8) | std::uint32_t(p[4 * i + 3]);
        for (int i = 16; i < 64; ++i) {
            std::uint32_t s0 = rotr(w[i - 15], 7) ^ rotr(w[i - 15], 18) ^ (w[i - 15] >> 3);
            std::uint32_t s1 = rotr(w[i - 2], 17) ^ rotr(w[i - 2], 19) ^ (w[i - 2] >> 10);
            w[i] = w[i - 16] + s0 + w[i - 7] + s1;
        }
        std::uint32_t a = h[0], b = h[1], c = h[2], d = h[3], e = h[4], f = h[5], g = h[6],
                      hh = h[7];
        for (int i = 0; i < 64; ++i) {
            std::uint32_t s1 = rotr(e, 6) ^ rotr(e, 11) ^ rotr(e, 25);
            std::uint32_t ch = (e & f) ^ (~e & g);
            std::uint32_t t1 = hh + s1 + ch + k[i] + w[i];
            std::uint32_t s0 = rotr(a, 2) ^ rotr(a, 13) ^ rotr(a, 22);
            std::uint32_t maj = (a & b) ^ (a & c) ^ (b & c);
            std::uint32_t t2 = s0 + maj;
            hh = g;
            g = f;
            f = e;
            e = d + t1;
            d = c;
            c = b;
            b = a;
            a = t1 + t2;
        }
        h[0] += a;
        h[1] += b;
        h[2] += c;
        h[3] += d;
        h[4] += e;
        h[5] += f;
        h[6] += g;
        h[7] += hh;
    }

    void update(const void* data, std::size_t len) {
        const unsigned char* p = static_cast<const unsigned char*>(data);
        total += len;
        while (len > 0) {
            std::size_t take = std::min(len, buf.size() - fill);
            std::memcpy(buf.data() + fill, p, take);
            fill += take;
            p += take;
            len -= take;
            if (fill == 64) {
                block(buf.data());
                fill = 0;
            }
        }
    }

    std::string hex() {
        std::uint64_t bits = total * 8;
        unsigned char pad = 0x80;
        update(&pad, 1);
        unsigned char zero = 0;
        while (fill != 56) update(&zero, 1);
        unsigned char len[8];
        for (int i = 0; i < 8; ++i) len[i] = static_cast<unsigned char>(bits >> (56 - 8 * i));
        update(len, 8);
        static const char* digits = "0123456789abcdef";
        std::string out;
        for (std::uint32_t v : h)
            for (int i = 28; i >= 0; i -= 4) out.push_back(digits[(v >> i) & 0xf]);
        return out;
    }
};

} // namespace detail

inline std::string sha256_hex(const std::string& bytes) {
    detail::Sha256 s;
    s.update(bytes.data(), bytes.size());
    return s.hex();
}

inline std::string sha256_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open for hashing: " + path.string());
    detail::Sha256 s;
    char chunk[65536];
    while (in) {
        in.read(chunk, sizeof chunk);
        s.update(chunk, static_cast<std::size_t>(in.gcount()));
    }
    return s.hex();
}

// ---------------------------------------------------------------- weights

inline json weight_to_json(const Weight& w) {
    json j;
    j["kind"] = w.kind_name();
    switch (w.kind()) {
        case WeightKind::PolynomialProduct:
            j["parameters"] = w.parameters();
            break;
        case WeightKind::Tabulated:
            j["x"] = w.table_x();
            j["w"] = w.table_w();
            break;
        default:
            j["parameters"] = json::array();
    }
    return j;
}

inline Weight weight_from_json(const json& j) {
    std::string kind = j.value("kind", "exp-linear");
    if (kind == "exp-linear") return Weight::exp_linear();
    if (kind == "gauss-exp") return Weight::gauss_exp();
    if (kind == "tabulated") {
        if (j.contains("csv")) {
            std::ifstream in(j["csv"].get<std::string>());
            if (!in) throw ConfigError("cannot open weight table: " + j["csv"].get<std::string>());
            std::vector<double> xs, ws;
            std::string line;
            while (std::getline(in, line)) {
                if (line.empty() || line[0] == '#') continue;
                std::replace(line.begin(), line.end(), ',', ' ');
                std::istringstream row(line);
                double x, v;
                if (row >> x >> v) {
                    xs.push_back(x);
                    ws.push_back(v);
                }
            }
            return Weight::tabulated(std::move(xs), std::move(ws));
        }
        return Weight::tabulated(j.at("x").get<std::vector<double>>(),
                                 j.at("w").get<std::vector<double>>());
    }
    if (kind == "polynomial-product") {
        if (j.contains("parameters")) {
            auto params = j["parameters"].get<std::vector<double>>();
            if (params.size() < 3) throw ConfigError("polynomial-product needs p, N and B factors");
            double p = params[0];
            int axes = static_cast<int>(params[1]);
            std::vector<double> log_b(params.begin() + 2, params.end());
            return Weight::polynomial_product(p, axes, std::move(log_b));
        }
        // derived form: base weight + axes + p
        Weight base = weight_from_json(j.at("base"));
        int axes = j.value("axes", 2);
        double p = j.value("p", 1.0);
        int k_max = j.value("k_max", 40);
        return Weight::polynomial_product(p, axes, growth_suprema_log(base, k_max));
    }
    throw ConfigError("unknown weight kind: " + kind);
}

// ---------------------------------------------------------------- certificate

inline json certificate_to_json(const AnnihilationCertificate& c) {
    json j;
    j["format"] = "heatbasis-certificate";
    j["version"] = 1;
    j["method"] = c.method;
    j["p"] = c.p;
    j["level"] = c.level;
    j["epsilon"] = c.epsilon;
    j["m_max"] = c.m_max;
    j["weight"] = json{{"kind", c.weight_kind}, {"parameters", c.weight_params}};
    j["seed"] = c.seed;
    j["thresholds"] = c.thresholds;
    json steps = json::array();
    for (const auto& s : c.steps) {
        steps.push_back(json{{"m", s.m},
                             {"L", s.L},
                             {"N", s.N},
                             {"delta", s.delta},
                             {"rho_bound", s.rho_bound},
                             {"denominator", s.denominator},
                             {"step_norm", s.step_norm},
                             {"vanished", s.vanished},
                             {"saturated", s.saturated}});
    }
    j["steps"] = steps;
    j["basis_constant_before"] = c.basis_constant_before;
    j["basis_constant_after"] = c.basis_constant_after;
    j["lemma_bound"] = c.lemma_bound;
    j["transform_distance"] = json{{"lower", c.distance_lower}, {"upper", c.distance_upper}};
    json blocks = json::array();
    for (const auto& b : c.residuals)
        blocks.push_back(
            json{{"k", b.k}, {"from", b.from}, {"residual", b.residual}, {"norm", b.element_norm}});
    j["residuals"] = blocks;
    return j;
}

inline AnnihilationCertificate certificate_from_json(const json& j) {
    if (j.value("format", "") != "heatbasis-certificate")
        throw DataError("not a certificate file");
    AnnihilationCertificate c;
    c.method = j.value("method", "perturbation");
    c.p = j.at("p").get<double>();
    c.level = j.at("level").get<int>();
    c.epsilon = j.at("epsilon").get<double>();
    c.m_max = j.at("m_max").get<int>();
    c.weight_kind = j.at("weight").at("kind").get<std::string>();
    c.weight_params = j.at("weight").value("parameters", std::vector<double>{});
    c.seed = j.value("seed", std::uint64_t(0));
    c.thresholds = j.at("thresholds").get<std::vector<std::size_t>>();
    for (const auto& s : j.value("steps", json::array())) {
        StepRecord r;
        r.m = s.value("m", 0);
        r.L = s.value("L", std::size_t(0));
        r.N = s.value("N", std::size_t(0));
        r.delta = s.value("delta", 0.0);
        r.rho_bound = s.value("rho_bound", 0.0);
        r.denominator = s.value("denominator", 0.0);
        r.step_norm = s.value("step_norm", 0.0);
        r.vanished = s.value("vanished", false);
        r.saturated = s.value("saturated", false);
        c.steps.push_back(r);
    }
    c.basis_constant_before = j.value("basis_constant_before", 1.0);
    c.basis_constant_after = j.value("basis_constant_after", 1.0);
    c.lemma_bound = j.value("lemma_bound", 1.0);
    c.distance_lower = j.at("transform_distance").value("lower", 0.0);
    c.distance_upper = j.at("transform_distance").value("upper", 0.0);
    for (const auto& b : j.value("residuals", json::array())) {
        ResidualBlock blk;
        blk.k = b.at("k").get<int>();
        blk.from = b.at("from").get<std::size_t>();
        blk.residual = b.at("residual").get<std::vector<double>>();
        blk.element_norm = b.at("norm").get<std::vector<double>>();
        c.residuals.push_back(std::move(blk));
    }
    return c;
}

inline Weight certificate_weight(const AnnihilationCertificate& c) {
    json j;
    j["kind"] = c.weight_kind;
    j["parameters"] = c.weight_params;
    return weight_from_json(j);
}

// ---------------------------------------------------------------- basis file

/// Compact binary layout: magic, version, dimension, level, p, thresholds,
/// then the elements row-major as 8-byte floats.
inline void write_basis_file(const std::filesystem::path& path, const BasisState& basis) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write basis file: " + path.string());
    const char magic[4] = {'H', 'B', 'B', '1'};
    out.write(magic, 4);
    std::uint32_t version = 1;
    std::uint64_t dim = basis.dim();
    std::uint32_t level = static_cast<std::uint32_t>(basis.model().grid().level());
    double p = basis.model().p();
    std::uint32_t m_count = static_cast<std::uint32_t>(basis.thresholds.size());
    out.write(reinterpret_cast<const char*>(&version), 4);
    out.write(reinterpret_cast<const char*>(&dim), 8);
    out.write(reinterpret_cast<const char*>(&level), 4);
    out.write(reinterpret_cast<const char*>(&p), 8);
    out.write(reinterpret_cast<const char*>(&m_count), 4);
    for (std::size_t t : basis.thresholds) {
        std::uint64_t v = t;
        out.write(reinterpret_cast<const char*>(&v), 8);
    }
    for (std::size_t n = 1; n <= basis.dim(); ++n) {
        std::vector<double> e = basis.element(n);
        out.write(reinterpret_cast<const char*>(e.data()), static_cast<std::streamsize>(8 * e.size()));
    }
    if (!out) throw DataError("short write on basis file: " + path.string());
}

struct BasisFile {
    std::uint64_t dim = 0;
    std::uint32_t level = 0;
    double p = 1.0;
    std::vector<std::size_t> thresholds;
    std::vector<std::vector<double>> elements; // row n-1 = element n
};

inline BasisFile read_basis_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open basis file: " + path.string());
    char magic[4];
    in.read(magic, 4);
    if (!in || std::string(magic, 4) != "HBB1") throw DataError("not a basis file: " + path.string());
    BasisFile f;
    std::uint32_t version = 0, m_count = 0;
    in.read(reinterpret_cast<char*>(&version), 4);
    in.read(reinterpret_cast<char*>(&f.dim), 8);
    in.read(reinterpret_cast<char*>(&f.level), 4);
    in.read(reinterpret_cast<char*>(&f.p), 8);
    in.read(reinterpret_cast<char*>(&m_count), 4);
    if (!in || version != 1) throw DataError("unsupported basis file header");
    if (f.dim != (std::uint64_t(1) << f.level)) throw DataError("basis file header inconsistent");
    for (std::uint32_t i = 0; i < m_count; ++i) {
        std::uint64_t v = 0;
        in.read(reinterpret_cast<char*>(&v), 8);
        f.thresholds.push_back(static_cast<std::size_t>(v));
    }
    f.elements.assign(f.dim, std::vector<double>(f.dim, 0.0));
    for (auto& row : f.elements) {
        in.read(reinterpret_cast<char*>(row.data()), static_cast<std::streamsize>(8 * row.size()));
        if (!in) throw DataError("basis file truncated: " + path.string());
    }
    return f;
}

inline void write_basis_csv(const std::filesystem::path& path, const BasisState& basis) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write basis CSV: " + path.string());
    out.precision(17);
    for (std::size_t n = 1; n <= basis.dim(); ++n) {
        std::vector<double> e = basis.element(n);
        for (std::size_t i = 0; i < e.size(); ++i) out << (i ? "," : "") << e[i];
        out << "\n";
    }
}

// ---------------------------------------------------------------- reports

inline json decay_report_to_json(const DecayReport& r) {
    json j;
    j["format"] = "heatbasis-decay";
    j["schedule"] = json{{"t0", r.schedule.t0}, {"ratio", r.schedule.ratio}, {"count", r.schedule.count}};
    j["times"] = r.times;
    j["sup_norms"] = r.sup_norms;
    j["fitted_slope"] = r.fitted_slope;
    j["theoretical_exponent"] = r.theoretical_exponent;
    j["residual_of_fit"] = r.residual_of_fit;
    j["scaled_plateau_ratio"] = r.scaled_plateau_ratio;
    j["degenerate"] = r.degenerate;
    j["truncated"] = r.truncated;
    j["verdict"] = r.verdict ? "pass" : "fail";
    return j;
}

inline void write_decay_csv(const std::filesystem::path& path, const DecayReport& r) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write decay CSV: " + path.string());
    out.precision(17);
    out << "t,sup_norm\n";
    for (std::size_t i = 0; i < r.times.size(); ++i) out << r.times[i] << "," << r.sup_norms[i] << "\n";
}

inline void write_representer_csv(const std::filesystem::path& path, const MomentFunctional& mf) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write representer CSV: " + path.string());
    out.precision(17);
    out << "s,g\n";
    for (std::size_t i = 0; i < mf.g.size(); ++i)
        out << mf.g.grid->s_mid(i) << "," << mf.g[i] << "\n";
}

// ---------------------------------------------------------------- manifest

struct ManifestEntry {
    std::string path;
    std::uint64_t bytes = 0;
    std::string sha256;
};

inline void write_manifest(const std::filesystem::path& dir, const std::string& config_hash,
                           std::uint64_t seed, const std::vector<std::string>& files,
                           const std::string& created) {
    json j;
    j["format"] = "heatbasis-manifest";
    j["artifact_version"] = "0.1.0";
    j["generator"] = Rng::name();
    j["seed"] = seed;
    j["config_sha256"] = config_hash;
    j["created_utc"] = created;
    json inv = json::array();
    for (const auto& f : files) {
        std::filesystem::path p = dir / f;
        inv.push_back(json{{"path", f},
                           {"bytes", std::filesystem::file_size(p)},
                           {"sha256", sha256_file(p)}});
    }
    j["files"] = inv;
    std::ofstream out(dir / "manifest.json");
    out << j.dump(2) << "\n";
}

/// Every listed file must exist and match its recorded hash.
inline bool verify_manifest(const std::filesystem::path& manifest_path, std::string* diagnostic = nullptr) {
    std::ifstream in(manifest_path);
    if (!in) {
        if (diagnostic) *diagnostic = "manifest missing";
        return false;
    }
    json j = json::parse(in, nullptr, true);
    std::filesystem::path dir = manifest_path.parent_path();
    for (const auto& e : j.value("files", json::array())) {
        std::filesystem::path p = dir / e.at("path").get<std::string>();
        if (!std::filesystem::exists(p)) {
            if (diagnostic) *diagnostic = "missing file: " + p.string();
            return false;
        }
        if (std::filesystem::file_size(p) != e.at("bytes").get<std::uint64_t>() ||
            sha256_file(p) != e.at("sha256").get<std::string>()) {
            if (diagnostic) *diagnostic = "hash mismatch: " + p.string();
            return false;
        }
    }
    return true;
}

} // namespace heatbasis

#endif
