// Command-line driver: builds and verifies annihilating bases and runs the
// heat-decay experiments. Exit codes: 0 pass, 1 verification failure,
// 2 configuration/data error, 3 resolution exhausted.

#include <CLI11.hpp>

#include "heatbasis/experiment.hpp"

using namespace heatbasis;

namespace {

struct CommonFlags {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    std::optional<int> level;
    std::optional<int> m_max;
    std::optional<double> p;
    std::optional<std::string> method;
    std::optional<std::string> data_kind;
    std::optional<int> data_m;
    std::optional<std::string> certificate;
    std::optional<std::string> basis;
    std::optional<int> axes;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
    cmd->add_option("--config", f.config_path, "experiment config (JSON)");
    cmd->add_option("--seed", f.seed, "override: random seed");
    cmd->add_option("--out", f.out, "override: output directory");
    cmd->add_option("--level", f.level, "override: dyadic grid level K");
    cmd->add_option("--m-max", f.m_max, "override: functional orders to annihilate");
    cmd->add_option("--p", f.p, "override: exponent p in {1,2}");
    cmd->add_option("--method", f.method, "override: perturbation | gram-schmidt");
    cmd->add_option("--data-kind", f.data_kind, "override: baseline | annihilated | custom");
    cmd->add_option("--data-m", f.data_m, "override: annihilated moment order");
    cmd->add_option("--certificate", f.certificate, "override: certificate path");
    cmd->add_option("--basis", f.basis, "override: basis file path");
    cmd->add_option("--axes", f.axes, "override: tensor dimension N");
}

ExperimentConfig resolve(const CommonFlags& f) {
    ExperimentConfig cfg =
        f.config_path.empty() ? ExperimentConfig{} : ExperimentConfig::load(f.config_path);
    if (f.seed) cfg.seed = *f.seed;
    if (f.out) cfg.out_dir = *f.out;
    if (f.level) cfg.level = *f.level;
    if (f.m_max) cfg.m_max = *f.m_max;
    if (f.p) cfg.p = *f.p;
    if (f.method) cfg.method = *f.method;
    if (f.data_kind) cfg.data_kind = *f.data_kind;
    if (f.data_m) cfg.data_m = *f.data_m;
    if (f.certificate) cfg.certificate_path = *f.certificate;
    if (f.basis) cfg.basis_path = *f.basis;
    if (f.axes) cfg.axes = *f.axes;
    cfg.validate();
    return cfg;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"weighted-space annihilating bases and heat-decay experiments"};
    app.require_subcommand(1);

    CommonFlags build_flags, verify_flags, heat_flags, tensor_flags;
    auto* build = app.add_subcommand("basis-build", "construct an annihilating basis");
    add_common(build, build_flags);
    auto* verify = app.add_subcommand("basis-verify", "re-verify a basis/certificate pair");
    std::string verify_basis, verify_cert;
    verify->add_option("--basis", verify_basis, "basis binary")->required();
    verify->add_option("--certificate", verify_cert, "certificate JSON")->required();
    auto* heat = app.add_subcommand("heat-decay", "run the decay experiment");
    add_common(heat, heat_flags);
    auto* tensor = app.add_subcommand("tensor-decay", "run the N-dimensional decay experiment");
    add_common(tensor, tensor_flags);

    CLI11_PARSE(app, argc, argv);

    try {
        if (build->parsed()) {
            cmd_basis_build(resolve(build_flags));
        } else if (verify->parsed()) {
            cmd_basis_verify(verify_basis, verify_cert);
        } else if (heat->parsed()) {
            cmd_heat_decay(resolve(heat_flags));
        } else if (tensor->parsed()) {
            cmd_tensor_decay(resolve(tensor_flags));
        }
    } catch (const VerificationError& e) {
        std::cerr << "verification failure: " << e.what() << "\n";
        return 1;
    } catch (const ResolutionExhausted& e) {
        std::cerr << "resolution exhausted: " << e.what() << "\n";
        return 3;
    } catch (const ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return 2;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
