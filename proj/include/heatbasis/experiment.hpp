#ifndef HEATBASIS_EXPERIMENT_HPP
#define HEATBASIS_EXPERIMENT_HPP

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "heatbasis/io.hpp"
#include "heatbasis/tensor.hpp"

namespace heatbasis {

/// One experiment description: a single JSON document, with CLI flags
/// overriding fields one-to-one. The same seed always reproduces the same
/// output bytes for certificates and reports.
struct ExperimentConfig {
    json weight_spec = json{{"kind", "exp-linear"}};
    double p = 1.0;
    int level = 12;
    int m_max = 2;
    double epsilon = 0.5;
    TimeSchedule schedule{1.0, 2.0, 20};
    int axes = 2;
    std::uint64_t seed = 42;
    std::string out_dir = "out";
    std::string method = "perturbation"; // or "gram-schmidt" (p = 2)

    // data specification for the decay commands
    std::string data_kind = "baseline"; // baseline | annihilated | custom
    int data_m = 1;
    std::string certificate_path;
    std::string basis_path;
    std::vector<double> custom_coefficients;

    static ExperimentConfig from_json(const json& j) {
        ExperimentConfig c;
        if (j.contains("weight")) c.weight_spec = j["weight"];
        c.p = j.value("p", c.p);
        c.level = j.value("level", c.level);
        c.m_max = j.value("m_max", c.m_max);
        c.epsilon = j.value("epsilon", c.epsilon);
        if (j.contains("schedule")) {
            const auto& s = j["schedule"];
            c.schedule.t0 = s.value("t0", c.schedule.t0);
            c.schedule.ratio = s.value("ratio", c.schedule.ratio);
            c.schedule.count = s.value("count", c.schedule.count);
        }
        c.axes = j.value("axes", c.axes);
        c.seed = j.value("seed", c.seed);
        c.out_dir = j.value("out", c.out_dir);
        c.method = j.value("method", c.method);
        if (j.contains("data")) {
            const auto& d = j["data"];
            c.data_kind = d.value("kind", c.data_kind);
            c.data_m = d.value("m", c.data_m);
            c.certificate_path = d.value("certificate", c.certificate_path);
            c.basis_path = d.value("basis", c.basis_path);
            if (d.contains("coefficients"))
                c.custom_coefficients = d["coefficients"].get<std::vector<double>>();
        }
        c.validate();
        return c;
    }

    static ExperimentConfig load(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw ConfigError("cannot open config: " + path);
        json j;
        try {
            j = json::parse(in);
        } catch (const std::exception& e) {
            throw ConfigError(std::string("config is not valid JSON: ") + e.what());
        }
        return from_json(j);
    }

    json to_json() const {
        json j;
        j["weight"] = weight_spec;
        j["p"] = p;
        j["level"] = level;
        j["m_max"] = m_max;
        j["epsilon"] = epsilon;
        j["schedule"] = json{{"t0", schedule.t0}, {"ratio", schedule.ratio}, {"count", schedule.count}};
        j["axes"] = axes;
        j["seed"] = seed;
        j["out"] = out_dir;
        j["method"] = method;
        json d;
        d["kind"] = data_kind;
        d["m"] = data_m;
        if (!certificate_path.empty()) d["certificate"] = certificate_path;
        if (!basis_path.empty()) d["basis"] = basis_path;
        if (!custom_coefficients.empty()) d["coefficients"] = custom_coefficients;
        j["data"] = d;
        return j;
    }

    void validate() const {
        if (level < 1 || level > 24) throw ConfigError("level must be in [1,24]");
        if (p < 1.0) throw ConfigError("p must be >= 1");
        if (m_max < 0) throw ConfigError("m_max must be >= 0");
        if (!(epsilon > 0.0) || epsilon >= 1.0) throw ConfigError("epsilon must lie in (0,1)");
        if (axes < 2 || axes > 3) throw ConfigError("tensor experiments support N in {2,3}");
        if (method != "perturbation" && method != "gram-schmidt")
            throw ConfigError("method must be perturbation or gram-schmidt");
        if (data_kind != "baseline" && data_kind != "annihilated" && data_kind != "custom")
            throw ConfigError("data kind must be baseline, annihilated or custom");
        if (schedule.t0 < 1.0 || schedule.ratio <= 1.0 || schedule.count < 2)
            throw ConfigError("schedule needs t0 >= 1, ratio > 1, count >= 2");
    }

    Weight weight() const { return weight_from_json(weight_spec); }
};

namespace detail {

inline std::string timestamp_utc() {
    auto now = std::chrono::system_clock::now();
    std::time_t t = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

inline void write_text(const std::filesystem::path& p, const std::string& text) {
    std::ofstream out(p);
    if (!out) throw DataError("cannot write " + p.string());
    out << text;
}

} // namespace detail

/// Construct the annihilating basis for the configured weight, write the
/// basis binary, the certificate and a human-readable summary, and seal the
/// run with a manifest.
inline AnnihilationCertificate cmd_basis_build(const ExperimentConfig& cfg, std::ostream& log = std::cout) {
    cfg.validate();
    Weight w = cfg.weight();
    FastGrowthReport growth = check_fast_growth(w, std::max(1, cfg.m_max));
    if (!growth.pass)
        throw ConfigError("weight fails the fast-growth condition at order " +
                          std::to_string(growth.entries.back().m));

    auto grid = make_dyadic_grid(cfg.level);
    auto model = std::make_shared<const WeightedModel>(grid, w, cfg.p);

    BasisState basis = BasisState::haar_basis(model);
    AnnihilationCertificate cert;
    if (cfg.method == "gram-schmidt") {
        if (cfg.p != 2.0) throw ConfigError("the gram-schmidt method requires p = 2");
        basis = gram_schmidt_annihilating(model, cfg.m_max);
        cert.method = "gram-schmidt";
        cert.p = cfg.p;
        cert.level = cfg.level;
        cert.epsilon = cfg.epsilon;
        cert.m_max = cfg.m_max;
        cert.weight_kind = w.kind_name();
        cert.weight_params = w.parameters();
        cert.thresholds = basis.thresholds;
        cert.basis_constant_before = 1.0;
        cert.basis_constant_after = 1.0;
        cert.lemma_bound = 1.0;
        cert.residuals = audit_residuals(basis, cert.thresholds);
        std::string violation = cert.first_violation();
        if (!violation.empty()) throw InternalError("certificate unsound: " + violation);
    } else {
        if (cfg.p == 2.0) basis = BasisState::weighted_haar_basis(model);
        PerturbationPlan plan = PerturbationPlan::defaults(cfg.epsilon, cfg.m_max, grid->cells());
        BuildResult res = build_annihilating_basis(basis, plan, Rng(cfg.seed));
        basis = std::move(res.basis);
        cert = std::move(res.certificate);
    }
    cert.seed = cfg.seed;

    std::filesystem::create_directories(cfg.out_dir);
    std::filesystem::path dir(cfg.out_dir);
    write_basis_file(dir / "basis.bin", basis);
    detail::write_text(dir / "certificate.json", certificate_to_json(cert).dump(2) + "\n");

    std::string summary;
    summary += "annihilating basis build\n";
    summary += "  method: " + cert.method + "  p=" + std::to_string(cert.p) +
               "  level=" + std::to_string(cert.level) + "  weight=" + cert.weight_kind + "\n";
    summary += "  thresholds (J^m vanishes for n > t_m):\n";
    for (std::size_t k = 0; k < cert.thresholds.size(); ++k) {
        summary += "    m=" + std::to_string(k + 1) + "  t_m=" + std::to_string(cert.thresholds[k]);
        if (cert.thresholds[k] >= (std::size_t(1) << cert.level))
            summary += "  (saturated: empty tail at this resolution)";
        summary += "\n";
    }
    summary += "  ||id-T|| in [" + std::to_string(cert.distance_lower) + ", " +
               std::to_string(cert.distance_upper) + "]  epsilon=" + std::to_string(cert.epsilon) + "\n";
    summary += "  basis constant " + std::to_string(cert.basis_constant_before) + " -> " +
               std::to_string(cert.basis_constant_after) + " (bound " +
               std::to_string(cert.lemma_bound) + ")\n";
    detail::write_text(dir / "summary.txt", summary);
    log << summary;

    std::string config_hash = sha256_hex(cfg.to_json().dump());
    write_manifest(dir, config_hash, cfg.seed, {"basis.bin", "certificate.json", "summary.txt"},
                   detail::timestamp_utc());
    return cert;
}

/// Re-verify a basis/certificate pair from the files alone: residuals and
/// operator distances are recomputed from the stored elements and must
/// reproduce the recorded values and satisfy the certificate invariants.
inline void cmd_basis_verify(const std::string& basis_path, const std::string& cert_path,
                             std::ostream& log = std::cout) {
    std::ifstream in(cert_path);
    if (!in) throw DataError("cannot open certificate: " + cert_path);
    json cj;
    try {
        cj = json::parse(in);
    } catch (const std::exception& e) {
        throw DataError(std::string("certificate is not valid JSON: ") + e.what());
    }
    AnnihilationCertificate cert = certificate_from_json(cj);
    BasisFile file = read_basis_file(basis_path);

    if (file.level != static_cast<std::uint32_t>(cert.level) || file.p != cert.p ||
        file.thresholds != cert.thresholds)
        throw VerificationError("basis file header does not match the certificate");

    Weight w = certificate_weight(cert);
    auto grid = make_dyadic_grid(cert.level);
    auto model = std::make_shared<const WeightedModel>(grid, w, cert.p);
    const std::size_t dim = grid->cells();
    if (file.dim != dim) throw VerificationError("basis dimension does not match the level");

    // residuals from scratch
    for (const auto& blk : cert.residuals) {
        const auto& gamma = model->moment_pairing(blk.k);
        if (blk.from + blk.residual.size() != dim + 1 || blk.residual.size() != blk.element_norm.size())
            throw VerificationError("residual block shape mismatch at k=" + std::to_string(blk.k));
        for (std::size_t i = 0; i < blk.residual.size(); ++i) {
            std::size_t n = blk.from + i;
            const auto& e = file.elements[n - 1];
            double r = std::abs(BasisState::dot(gamma, e));
            double nrm = model->coeff_norm(e);
            if (std::abs(r - blk.residual[i]) > 1e-12 * (1.0 + nrm) ||
                std::abs(nrm - blk.element_norm[i]) > 1e-12 * (1.0 + nrm))
                throw VerificationError("certificate entry does not match the basis at (k=" +
                                        std::to_string(blk.k) + ", n=" + std::to_string(n) + ")");
            if (r > AnnihilationCertificate::residual_tolerance * std::max(nrm, 1e-300))
                throw VerificationError("residual bound violated at (k=" + std::to_string(blk.k) +
                                        ", n=" + std::to_string(n) + ")");
        }
    }

    // operator distance from scratch (perturbation method only)
    if (cert.method == "perturbation") {
        DyadicTransforms transforms =
            cert.p == 2.0 ? DyadicTransforms(model->frame_weights()) : DyadicTransforms(dim);
        const auto& fw = model->frame_weights();
        double recomputed = 0.0;
        if (cert.p == 1.0) {
            std::vector<double> col(dim);
            std::vector<double> unit(dim, 0.0);
            for (std::size_t jcol = 0; jcol < dim; ++jcol) {
                unit[jcol] = 1.0;
                std::vector<double> coords = transforms.analyze(unit);
                unit[jcol] = 0.0;
                std::fill(col.begin(), col.end(), 0.0);
                for (std::size_t k = 0; k < dim; ++k)
                    if (coords[k] != 0.0) BasisState::axpy(coords[k], file.elements[k], col);
                col[jcol] -= 1.0;
                double nrm = 0.0;
                for (std::size_t i = 0; i < dim; ++i) nrm += std::abs(col[i]) * fw[i];
                recomputed = std::max(recomputed, nrm / fw[jcol]);
            }
        } else {
            Rng rng(1234);
            std::vector<double> v(dim);
            for (auto& e : v) e = rng.uniform(-1.0, 1.0);
            for (int it = 0; it < 60; ++it) {
                std::vector<double> coords = transforms.analyze(v);
                std::vector<double> tv(dim, 0.0);
                for (std::size_t k = 0; k < dim; ++k)
                    if (coords[k] != 0.0) BasisState::axpy(coords[k], file.elements[k], tv);
                for (std::size_t i = 0; i < dim; ++i) tv[i] = v[i] - tv[i];
                for (std::size_t i = 0; i < dim; ++i) tv[i] *= fw[i];
                std::vector<double> back(dim, 0.0);
                // (id-T)^T acting on the weighted residual, via the same columns
                std::vector<double> pair(dim);
                for (std::size_t k = 0; k < dim; ++k) pair[k] = BasisState::dot(file.elements[k], tv);
                std::vector<double> syn = transforms.adjoint_from_pairs(pair);
                for (std::size_t i = 0; i < dim; ++i) back[i] = (tv[i] - syn[i]) / fw[i];
                double nrm = std::sqrt(model->coeff_ip(back, back));
                if (nrm == 0.0) break;
                recomputed = std::sqrt(nrm);
                for (std::size_t i = 0; i < dim; ++i) v[i] = back[i] / nrm;
            }
        }
        if (recomputed > cert.distance_upper * (1.0 + 1e-9) + 1e-12)
            throw VerificationError("recomputed operator distance exceeds the recorded bound");
        if (!(cert.distance_upper < cert.epsilon))
            throw VerificationError("transform distance reaches epsilon");
    }

    std::string violation = cert.first_violation();
    if (!violation.empty()) throw VerificationError(violation);
    log << "verify: pass (" << cert.method << ", p=" << cert.p << ", level=" << cert.level << ")\n";
}

/// Load a basis file against the certificate's model as a dense BasisState.
inline BasisState load_basis(const std::string& basis_path, const AnnihilationCertificate& cert) {
    BasisFile file = read_basis_file(basis_path);
    Weight w = certificate_weight(cert);
    auto grid = make_dyadic_grid(cert.level);
    auto model = std::make_shared<const WeightedModel>(grid, w, cert.p);
    if (file.dim != grid->cells()) throw DataError("basis file does not match the certificate level");
    BasisState b = BasisState::dense(model, std::move(file.elements), cert.method == "gram-schmidt");
    b.thresholds = file.thresholds;
    return b;
}

struct DecayArtifacts {
    DecayReport report;
    std::string label;
};

/// Decay experiment: baseline indicator data, certified annihilated tail
/// data, or custom coefficients on a stored basis. Writes CSV + JSON + a
/// verdict line and the run manifest.
inline DecayArtifacts cmd_heat_decay(const ExperimentConfig& cfg, std::ostream& log = std::cout) {
    cfg.validate();
    std::filesystem::create_directories(cfg.out_dir);
    std::filesystem::path dir(cfg.out_dir);

    DecayArtifacts art;
    if (cfg.data_kind == "baseline") {
        Weight w = cfg.weight();
        auto grid = make_dyadic_grid(cfg.level);
        auto model = std::make_shared<const WeightedModel>(grid, w, cfg.p);
        auto ind = halfline_indicator(grid, -1.0, 0.0);
        HeatEvolver ev(ind.f, model);
        art.report = decay_fit(ev, cfg.schedule, 0);
        art.label = "baseline";
    } else {
        if (cfg.certificate_path.empty() || cfg.basis_path.empty())
            throw ConfigError("annihilated/custom data needs a certificate and basis file; "
                              "run basis-build first and pass data.certificate / data.basis");
        std::ifstream in(cfg.certificate_path);
        if (!in)
            throw ConfigError("cannot open certificate " + cfg.certificate_path +
                              "; run basis-build first");
        AnnihilationCertificate cert = certificate_from_json(json::parse(in));
        BasisState basis = load_basis(cfg.basis_path, cert);
        auto model = basis.model_ptr();
        const std::size_t dim = basis.dim();

        int m = cfg.data_m;
        std::vector<double> coords(dim, 0.0);
        if (cfg.data_kind == "annihilated") {
            if (m < 1 || static_cast<std::size_t>(m) > cert.thresholds.size())
                throw ConfigError("no threshold for the requested order in this certificate");
            std::size_t from = cert.thresholds[static_cast<std::size_t>(m - 1)] + 1;
            if (from > dim)
                throw ConfigError("the order-" + std::to_string(m) +
                                  " tail is empty at this resolution (threshold saturated); "
                                  "rebuild with a larger level or the gram-schmidt method");
            Rng rng = Rng(cfg.seed).fork("tail-data-" + std::to_string(m));
            for (std::size_t n = from; n <= dim; ++n) coords[n - 1] = rng.uniform(-1.0, 1.0);
            art.label = "annihilated m=" + std::to_string(m);
        } else {
            if (cfg.custom_coefficients.empty()) throw ConfigError("custom data needs coefficients");
            for (std::size_t i = 0; i < cfg.custom_coefficients.size() && i < dim; ++i)
                coords[i] = cfg.custom_coefficients[i];
            art.label = "custom";
        }
        GridFunction data(model->grid_ptr(), Side::UnitInterval, basis.synthesize(coords));
        double nrm = model->norm(data);
        if (nrm > 0.0)
            for (auto& v : data.values) v /= nrm;
        // audit the vanishing moments of the synthesized data
        for (int k = 1; k <= m && cfg.data_kind == "annihilated"; ++k) {
            double r = std::abs(moment_functional(data, k, *model));
            if (r > 1e-8)
                throw VerificationError("tail data violates the order-" + std::to_string(k) +
                                        " moment: " + std::to_string(r));
        }
        HeatEvolver ev(data, model);
        art.report = decay_fit(ev, cfg.schedule, cfg.data_kind == "annihilated" ? m : cfg.data_m);
    }

    write_decay_csv(dir / "decay.csv", art.report);
    detail::write_text(dir / "decay.json", decay_report_to_json(art.report).dump(2) + "\n");
    std::string verdict = art.label + ": slope=" + std::to_string(art.report.fitted_slope) +
                          " target<=" + std::to_string(art.report.theoretical_exponent + 0.1) +
                          " residual=" + std::to_string(art.report.residual_of_fit) +
                          (art.report.verdict ? " PASS" : " FAIL") + "\n";
    detail::write_text(dir / "verdict.txt", verdict);
    log << verdict;

    write_manifest(dir, sha256_hex(cfg.to_json().dump()), cfg.seed,
                   {"decay.csv", "decay.json", "verdict.txt"}, detail::timestamp_utc());
    if (!art.report.verdict) throw VerificationError("decay verdict failed for " + art.label);
    return art;
}

/// Tensor decay experiment for N in {2,3}: the product weight is built from
/// the configured base weight, the per-axis certificate supplies the tail
/// span, and separable data evolves axis by axis.
inline DecayArtifacts cmd_tensor_decay(const ExperimentConfig& cfg, std::ostream& log = std::cout) {
    cfg.validate();
    std::filesystem::create_directories(cfg.out_dir);
    std::filesystem::path dir(cfg.out_dir);

    if (cfg.certificate_path.empty() || cfg.basis_path.empty())
        throw ConfigError("tensor decay needs a per-axis certificate and basis; run basis-build "
                          "with the per-axis weight first");
    std::ifstream in(cfg.certificate_path);
    if (!in) throw ConfigError("cannot open certificate " + cfg.certificate_path);
    AnnihilationCertificate cert = certificate_from_json(json::parse(in));
    BasisState axis_basis = load_basis(cfg.basis_path, cert);
    auto model = axis_basis.model_ptr();
    auto grid = model->grid_ptr();
    const std::size_t dim = axis_basis.dim();
    const std::size_t axes = static_cast<std::size_t>(cfg.axes);

    std::vector<std::shared_ptr<const WeightedModel>> models(axes, model);
    std::vector<const BasisState*> bases(axes, &axis_basis);

    // pointwise domination check of the product weight against the base
    ProductWeight pw = build_product_weight(cfg.weight(), cfg.axes, cfg.p);
    double dom = product_weight_domination(pw, 10000, Rng(cfg.seed).fork("domination"));
    if (dom > 1.0 + 1e-9)
        throw VerificationError("product weight fails the pointwise bound: ratio " +
                                std::to_string(dom));

    TensorFunction f;
    int m = 0;
    auto ind = halfline_indicator(grid, -1.0, 0.0);
    GridFunction ind_t = transfer(ind.f, *model);
    std::size_t tail_from = 0;
    if (cfg.data_kind == "baseline") {
        TensorTerm term;
        term.lambda = 1.0;
        for (std::size_t j = 0; j < axes; ++j) term.factors.push_back(ind_t);
        f.terms.push_back(std::move(term));
    } else if (cfg.data_kind == "annihilated") {
        m = cfg.data_m;
        if (m < 1 || static_cast<std::size_t>(m) > cert.thresholds.size())
            throw ConfigError("no threshold for the requested order in this certificate");
        tail_from = cert.thresholds[static_cast<std::size_t>(m - 1)];
        if (tail_from >= dim)
            throw ConfigError("the per-axis tail is empty at this resolution");
        Rng rng = Rng(cfg.seed).fork("tensor-data");
        std::vector<double> coords(dim, 0.0);
        for (std::size_t n = tail_from + 1; n <= dim; ++n) coords[n - 1] = rng.uniform(-1.0, 1.0);
        GridFunction tail(grid, Side::UnitInterval, axis_basis.synthesize(coords));
        TensorTerm term;
        term.lambda = 1.0;
        term.factors.push_back(std::move(tail));
        for (std::size_t j = 1; j < axes; ++j) term.factors.push_back(ind_t);
        f.terms.push_back(std::move(term));
    } else {
        throw ConfigError("tensor decay supports baseline and annihilated data");
    }
    f = normalize_terms(f, models);

    DecayArtifacts art;
    art.label = "tensor N=" + std::to_string(cfg.axes) + " " +
                (m > 0 ? "annihilated m=" + std::to_string(m) : "baseline");
    art.report = tensor_heat_decay(f, cfg.schedule, bases, models, tail_from, m);

    write_decay_csv(dir / "tensor_decay.csv", art.report);
    detail::write_text(dir / "tensor_decay.json", decay_report_to_json(art.report).dump(2) + "\n");
    std::string verdict = art.label + ": slope=" + std::to_string(art.report.fitted_slope) +
                          " target<=" + std::to_string(art.report.theoretical_exponent + 0.1) +
                          (art.report.verdict ? " PASS" : " FAIL") + "\n";
    detail::write_text(dir / "tensor_verdict.txt", verdict);
    log << verdict;
    write_manifest(dir, sha256_hex(cfg.to_json().dump()), cfg.seed,
                   {"tensor_decay.csv", "tensor_decay.json", "tensor_verdict.txt"},
                   detail::timestamp_utc());
    if (!art.report.verdict) throw VerificationError("tensor decay verdict failed");
    return art;
}

} // namespace heatbasis

#endif
