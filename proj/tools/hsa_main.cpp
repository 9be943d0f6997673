/**
 * hsa — learn an orthonormal projection aligning source and target sample
 * densities by minimizing their empirical Hellinger distance.
 *
 * Subcommands: synth, fit, gradcheck, eval, transform. Every JSON report
 * embeds the run manifest (command, parameters, input hashes, tool version,
 * seed); reruns with identical flags and seed reproduce outputs byte for
 * byte. Exit codes: 0 success, 1 check failure, 2 usage or input error.
 */

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "hsa/bandwidth.hpp"
#include "hsa/datasets.hpp"
#include "hsa/divergence.hpp"
#include "hsa/gradcheck.hpp"
#include "hsa/optimizer.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kToolVersion = "hsa 0.1.0";

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string fnv1a64_hex(const std::string& bytes) {
    std::uint64_t hash = 0xcbf29ce484222325ull;
    for (unsigned char c : bytes) {
        hash ^= c;
        hash *= 0x100000001b3ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(hash));
    return buf;
}

std::string read_file_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open file: " + path);
    std::stringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

/// Write-temp-then-rename so partially written outputs never appear.
void write_text_atomic(const fs::path& path, const std::string& contents) {
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write file: " + path.string());
        out << contents;
    }
    fs::rename(tmp, path);
}

std::string matrix_to_csv(const Eigen::MatrixXd& m, const Eigen::VectorXi* labels = nullptr) {
    std::string out;
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            if (j > 0) out += ',';
            out += format_double(m(i, j));
        }
        if (labels) {
            out += ',';
            out += std::to_string((*labels)(i));
        }
        out += '\n';
    }
    return out;
}

json matrix_to_json(const Eigen::MatrixXd& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

json make_manifest(const std::string& command, json parameters,
                   const std::vector<std::string>& input_paths, std::uint64_t seed) {
    json hashes = json::object();
    for (const std::string& path : input_paths) {
        hashes[path] = fnv1a64_hex(read_file_bytes(path));
    }
    return json{{"command", command},
                {"parameters", std::move(parameters)},
                {"input_hashes", std::move(hashes)},
                {"tool_version", kToolVersion},
                {"seed", seed}};
}

struct SynthOptions {
    hsa::ShiftSpec spec;
    std::string out_dir;
};

struct DataOptions {
    std::string source_path;
    std::string target_path;
    bool labeled = false;
    bool header = false;
};

struct FitOptions {
    DataOptions data;
    hsa::FitConfig config;
    std::string bandwidth_rule = "silverman";
    std::string out_dir;
};

struct GradcheckOptions {
    DataOptions data;
    bool use_synth = false;
    hsa::ShiftSpec spec;
    Eigen::Index p = 1;
    std::uint64_t seed = 0;
    double fd_step = hsa::kDefaultFdStep;
    double rel_floor = hsa::kDefaultRelFloor;
    double tol = 1e-5;
    std::string corrupt_entry;
    bool recompute_bandwidth = false;
    std::string bandwidth_rule = "silverman";
    double bandwidth_floor = hsa::kDefaultVarianceFloor;
    std::string out_file = "gradcheck_report.json";
};

struct EvalOptions {
    DataOptions data;
    std::string w_path;
    std::uint64_t seed = 0;
    std::string out_file = "eval_report.json";
};

struct TransformOptions {
    std::string input_path;
    std::string w_path;
    bool labeled = false;
    bool header = false;
    std::string out_file;
};

void add_shift_spec_flags(CLI::App* cmd, hsa::ShiftSpec& spec) {
    cmd->add_option("--d", spec.d, "ambient dimension");
    cmd->add_option("--n", spec.n_per_domain, "samples per domain");
    cmd->add_option("--informative", spec.informative_dims, "class-bearing dimensions");
    cmd->add_option("--shift", spec.shift_magnitude, "domain shift along nuisance dimensions");
    cmd->add_option("--rotation", spec.rotation_angle, "rotation (radians) in the first nuisance plane");
    cmd->add_option("--class-sep", spec.class_separation, "class separation along informative dimensions");
}

Eigen::MatrixXd load_w_matrix(const std::string& path) {
    return hsa::load_csv(path, false, hsa::DomainTag::source).data;
}

std::pair<hsa::SampleSet, hsa::SampleSet> load_pair(const DataOptions& data) {
    hsa::SampleSet source =
        hsa::load_csv(data.source_path, data.labeled, hsa::DomainTag::source, data.header);
    hsa::SampleSet target =
        hsa::load_csv(data.target_path, data.labeled, hsa::DomainTag::target, data.header);
    return {std::move(source), std::move(target)};
}

int cmd_synth(const SynthOptions& opt) {
    opt.spec.validate();
    auto [source, target] = hsa::make_shift_pair(opt.spec);

    const fs::path dir(opt.out_dir);
    fs::create_directories(dir);
    write_text_atomic(dir / "source.csv", matrix_to_csv(source.data, &*source.labels));
    write_text_atomic(dir / "target.csv", matrix_to_csv(target.data, &*target.labels));

    const json manifest = make_manifest(
        "synth",
        json{{"d", opt.spec.d},
             {"n", opt.spec.n_per_domain},
             {"informative", opt.spec.informative_dims},
             {"shift", opt.spec.shift_magnitude},
             {"rotation", opt.spec.rotation_angle},
             {"class_sep", opt.spec.class_separation},
             {"out", opt.out_dir}},
        {}, opt.spec.seed);
    write_text_atomic(dir / "manifest.json", manifest.dump(2) + "\n");

    std::cout << "synth: wrote " << (dir / "source.csv").string() << ", "
              << (dir / "target.csv").string() << " (" << opt.spec.n_per_domain
              << " rows each)\n";
    return 0;
}

int cmd_fit(const FitOptions& opt) {
    auto [source, target] = load_pair(opt.data);
    hsa::FitConfig config = opt.config;
    config.bandwidth_rule = hsa::bandwidth_rule_from_name(opt.bandwidth_rule);

    const hsa::FitReport report = hsa::fit(source, target, config);

    const fs::path dir(opt.out_dir);
    fs::create_directories(dir);
    write_text_atomic(dir / "w.csv", matrix_to_csv(report.final_w.w));

    std::string trace = "iteration,objective,grad_norm,step\n";
    for (std::size_t i = 0; i < report.objective_trace.size(); ++i) {
        const double step = i < report.step_trace.size() ? report.step_trace[i] : 0.0;
        trace += std::to_string(i) + ',' + format_double(report.objective_trace[i]) + ',' +
                 format_double(report.grad_norm_trace[i]) + ',' + format_double(step) + '\n';
    }
    write_text_atomic(dir / "trace.csv", trace);

    const json manifest = make_manifest(
        "fit",
        json{{"source", opt.data.source_path},
             {"target", opt.data.target_path},
             {"labeled", opt.data.labeled},
             {"header", opt.data.header},
             {"p", config.subspace_dim},
             {"max_iters", config.max_iters},
             {"step", config.initial_step},
             {"armijo_c", config.armijo_c},
             {"backtrack", config.backtrack_factor},
             {"rel_tol", config.rel_tol},
             {"grad_tol", config.grad_tol},
             {"refresh_bandwidth_every", config.refresh_bandwidth_every},
             {"bandwidth_rule", opt.bandwidth_rule},
             {"bandwidth_floor", config.bandwidth_floor},
             {"out", opt.out_dir}},
        {opt.data.source_path, opt.data.target_path}, config.seed);

    const json report_json{{"converged_reason", hsa::to_string(report.converged_reason)},
                           {"iterations_used", report.iterations_used},
                           {"final_objective", report.objective_trace.back()},
                           {"objective_trace", report.objective_trace},
                           {"grad_norm_trace", report.grad_norm_trace},
                           {"step_trace", report.step_trace},
                           {"final_w", matrix_to_json(report.final_w.w)},
                           {"manifest", manifest}};
    write_text_atomic(dir / "report.json", report_json.dump(2) + "\n");

    std::cout << "fit: " << hsa::to_string(report.converged_reason) << " after "
              << report.iterations_used << " iterations, objective "
              << format_double(report.objective_trace.back()) << "\n";
    return 0;
}

int cmd_gradcheck(const GradcheckOptions& opt) {
    hsa::SampleSet source(Eigen::MatrixXd::Zero(1, 1), hsa::DomainTag::source);
    hsa::SampleSet target(Eigen::MatrixXd::Zero(1, 1), hsa::DomainTag::target);
    std::vector<std::string> inputs;
    json source_param;
    if (opt.use_synth) {
        hsa::ShiftSpec spec = opt.spec;
        spec.seed = opt.seed;
        auto pair = hsa::make_shift_pair(spec);
        source = std::move(pair.first);
        target = std::move(pair.second);
        source_param = json{{"d", spec.d},
                            {"n", spec.n_per_domain},
                            {"informative", spec.informative_dims},
                            {"shift", spec.shift_magnitude},
                            {"rotation", spec.rotation_angle},
                            {"class_sep", spec.class_separation}};
    } else {
        if (opt.data.source_path.empty() || opt.data.target_path.empty()) {
            throw std::invalid_argument("gradcheck requires --source and --target, or --synth");
        }
        auto pair = load_pair(opt.data);
        source = std::move(pair.first);
        target = std::move(pair.second);
        inputs = {opt.data.source_path, opt.data.target_path};
        source_param = json{{"source", opt.data.source_path}, {"target", opt.data.target_path}};
    }

    const hsa::BandwidthRule rule = hsa::bandwidth_rule_from_name(opt.bandwidth_rule);
    const hsa::ProjectionMatrix w = hsa::init_projection(source, target, opt.p, opt.seed);
    const hsa::Bandwidth frozen = hsa::compute_bandwidth(source, target, w, rule, opt.bandwidth_floor);

    Eigen::MatrixXd analytic = hsa::gradient(source, target, w.w, frozen).g;
    if (!opt.corrupt_entry.empty()) {
        int row = 0, col = 0;
        if (std::sscanf(opt.corrupt_entry.c_str(), "%d,%d", &row, &col) != 2 || row < 0 ||
            col < 0 || row >= analytic.rows() || col >= analytic.cols()) {
            throw std::invalid_argument("--corrupt-entry expects 'row,col' within the gradient shape");
        }
        analytic(row, col) += 1.0;
    }

    hsa::MatrixFunction objective_of_w;
    if (opt.recompute_bandwidth) {
        objective_of_w = [&](const Eigen::MatrixXd& m) {
            const hsa::Bandwidth rederived =
                hsa::compute_bandwidth(source, target, m, rule, opt.bandwidth_floor);
            return hsa::objective(source, target, m, rederived).d_hat;
        };
    } else {
        objective_of_w = [&](const Eigen::MatrixXd& m) {
            return hsa::objective(source, target, m, frozen).d_hat;
        };
    }

    const Eigen::MatrixXd numeric = hsa::central_difference(objective_of_w, w.w, opt.fd_step);
    const hsa::GradCheckReport report =
        hsa::compare_gradients(analytic, numeric, opt.rel_floor, opt.fd_step);
    const bool passed = report.max_rel_error <= opt.tol;

    const json manifest = make_manifest(
        "gradcheck",
        json{{"inputs", source_param},
             {"p", opt.p},
             {"fd_step", opt.fd_step},
             {"rel_floor", opt.rel_floor},
             {"tol", opt.tol},
             {"corrupt_entry", opt.corrupt_entry},
             {"bandwidth_mode", opt.recompute_bandwidth ? "recomputed" : "frozen"},
             {"bandwidth_rule", opt.bandwidth_rule},
             {"out", opt.out_file}},
        inputs, opt.seed);
    const json report_json{{"max_rel_error", report.max_rel_error},
                           {"max_abs_error", report.max_abs_error},
                           {"worst_entry", {report.worst_row, report.worst_col}},
                           {"fd_step", report.fd_step},
                           {"n_entries", report.n_entries},
                           {"tol", opt.tol},
                           {"passed", passed},
                           {"bandwidth_mode", opt.recompute_bandwidth ? "recomputed" : "frozen"},
                           {"manifest", manifest}};
    write_text_atomic(opt.out_file, report_json.dump(2) + "\n");

    std::cout << "gradcheck: max_rel_error " << format_double(report.max_rel_error) << " (tol "
              << format_double(opt.tol) << ") at entry (" << report.worst_row << ", "
              << report.worst_col << ") -> " << (passed ? "PASS" : "FAIL") << "\n";
    return passed ? 0 : 1;
}

int cmd_eval(const EvalOptions& opt) {
    DataOptions data = opt.data;
    data.labeled = true;  // eval always needs labels
    auto [source, target] = load_pair(data);

    const hsa::ProjectionMatrix w(load_w_matrix(opt.w_path));
    if (w.dim() != source.dim()) {
        throw std::invalid_argument("projection rows (" + std::to_string(w.dim()) +
                                    ") do not match data dimension (" +
                                    std::to_string(source.dim()) + ")");
    }
    const hsa::ProjectionMatrix pca =
        hsa::init_projection(source, target, w.subspace_dim(), opt.seed);
    const hsa::ProjectionMatrix identity(
        Eigen::MatrixXd::Identity(source.dim(), source.dim()));

    hsa::EvalReport report;
    report.accuracy_adapted = hsa::knn_transfer_accuracy(source, target, w);
    report.accuracy_unadapted = hsa::knn_transfer_accuracy(source, target, identity);
    report.accuracy_pca = hsa::knn_transfer_accuracy(source, target, pca);
    report.n_test = target.size();

    const json manifest = make_manifest("eval",
                                        json{{"source", opt.data.source_path},
                                             {"target", opt.data.target_path},
                                             {"w", opt.w_path},
                                             {"header", opt.data.header},
                                             {"out", opt.out_file}},
                                        {opt.data.source_path, opt.data.target_path, opt.w_path},
                                        opt.seed);
    const json report_json{{"accuracy_adapted", report.accuracy_adapted},
                           {"accuracy_unadapted", report.accuracy_unadapted},
                           {"accuracy_pca", report.accuracy_pca},
                           {"n_test", report.n_test},
                           {"manifest", manifest}};
    write_text_atomic(opt.out_file, report_json.dump(2) + "\n");

    std::cout << "eval: adapted " << report.accuracy_adapted << ", unadapted "
              << report.accuracy_unadapted << ", pca " << report.accuracy_pca << " on "
              << report.n_test << " target samples\n";
    return 0;
}

int cmd_transform(const TransformOptions& opt) {
    const hsa::SampleSet input =
        hsa::load_csv(opt.input_path, opt.labeled, hsa::DomainTag::source, opt.header);
    const Eigen::MatrixXd w = load_w_matrix(opt.w_path);
    if (w.rows() != input.dim()) {
        throw std::invalid_argument("projection rows (" + std::to_string(w.rows()) +
                                    ") do not match data dimension (" +
                                    std::to_string(input.dim()) + ")");
    }
    const Eigen::MatrixXd projected = input.data * w;
    write_text_atomic(opt.out_file,
                      matrix_to_csv(projected, input.labels ? &*input.labels : nullptr));
    std::cout << "transform: wrote " << opt.out_file << " (" << projected.rows() << " x "
              << projected.cols() << ")\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"hsa: Hellinger-distance subspace alignment"};
    app.require_subcommand(1);

    SynthOptions synth;
    CLI::App* synth_cmd = app.add_subcommand("synth", "generate a synthetic covariate-shift pair");
    add_shift_spec_flags(synth_cmd, synth.spec);
    synth_cmd->add_option("--seed", synth.spec.seed, "random seed");
    synth_cmd->add_option("--out", synth.out_dir, "output directory")->required();

    FitOptions fit;
    CLI::App* fit_cmd = app.add_subcommand("fit", "learn the projection from two sample files");
    fit_cmd->add_option("--source", fit.data.source_path, "source CSV")->required();
    fit_cmd->add_option("--target", fit.data.target_path, "target CSV")->required();
    fit_cmd->add_flag("--labeled", fit.data.labeled, "inputs carry an integer label column");
    fit_cmd->add_flag("--header", fit.data.header, "skip the first line of each input");
    fit_cmd->add_option("--p", fit.config.subspace_dim, "subspace dimension");
    fit_cmd->add_option("--max-iters", fit.config.max_iters, "iteration cap");
    fit_cmd->add_option("--step", fit.config.initial_step, "initial line-search step");
    fit_cmd->add_option("--armijo-c", fit.config.armijo_c, "Armijo sufficient-decrease constant");
    fit_cmd->add_option("--backtrack", fit.config.backtrack_factor, "line-search shrink factor");
    fit_cmd->add_option("--rel-tol", fit.config.rel_tol, "relative objective-change tolerance");
    fit_cmd->add_option("--grad-tol", fit.config.grad_tol, "gradient-norm tolerance");
    fit_cmd->add_option("--seed", fit.config.seed, "random seed");
    fit_cmd->add_option("--refresh-bandwidth-every", fit.config.refresh_bandwidth_every,
                        "iterations between bandwidth refreshes");
    fit_cmd->add_option("--bandwidth-rule", fit.bandwidth_rule, "bandwidth rule (silverman|scott)");
    fit_cmd->add_option("--bandwidth-floor", fit.config.bandwidth_floor, "variance floor");
    fit_cmd->add_option("--out", fit.out_dir, "output directory")->required();

    GradcheckOptions gradcheck;
    CLI::App* gradcheck_cmd =
        app.add_subcommand("gradcheck", "verify the analytic gradient against finite differences");
    gradcheck_cmd->add_option("--source", gradcheck.data.source_path, "source CSV");
    gradcheck_cmd->add_option("--target", gradcheck.data.target_path, "target CSV");
    gradcheck_cmd->add_flag("--labeled", gradcheck.data.labeled, "inputs carry a label column");
    gradcheck_cmd->add_flag("--header", gradcheck.data.header, "skip the first line of each input");
    gradcheck_cmd->add_flag("--synth", gradcheck.use_synth, "use an inline synthetic pair");
    add_shift_spec_flags(gradcheck_cmd, gradcheck.spec);
    gradcheck_cmd->add_option("--p", gradcheck.p, "subspace dimension");
    gradcheck_cmd->add_option("--seed", gradcheck.seed, "random seed");
    gradcheck_cmd->add_option("--fd-step", gradcheck.fd_step, "central-difference step");
    gradcheck_cmd->add_option("--rel-floor", gradcheck.rel_floor, "relative-error denominator floor");
    gradcheck_cmd->add_option("--tol", gradcheck.tol, "pass threshold on max relative error");
    gradcheck_cmd->add_option("--corrupt-entry", gradcheck.corrupt_entry,
                              "debug: add 1.0 to analytic entry 'row,col'");
    gradcheck_cmd->add_flag("--recompute-bandwidth", gradcheck.recompute_bandwidth,
                            "re-derive the bandwidth at every probe (diagnoses the frozen-bandwidth gap)");
    gradcheck_cmd->add_option("--bandwidth-rule", gradcheck.bandwidth_rule,
                              "bandwidth rule (silverman|scott)");
    gradcheck_cmd->add_option("--bandwidth-floor", gradcheck.bandwidth_floor, "variance floor");
    gradcheck_cmd->add_option("--out", gradcheck.out_file, "report path");

    EvalOptions eval;
    CLI::App* eval_cmd =
        app.add_subcommand("eval", "1-NN transfer accuracy under a learned projection");
    eval_cmd->add_option("--source", eval.data.source_path, "labeled source CSV")->required();
    eval_cmd->add_option("--target", eval.data.target_path, "labeled target CSV")->required();
    eval_cmd->add_option("--w", eval.w_path, "projection CSV (d x p)")->required();
    eval_cmd->add_flag("--header", eval.data.header, "skip the first line of each input");
    eval_cmd->add_option("--seed", eval.seed, "seed for the PCA baseline");
    eval_cmd->add_option("--out", eval.out_file, "report path");

    TransformOptions transform;
    CLI::App* transform_cmd = app.add_subcommand("transform", "project a CSV through a learned W");
    transform_cmd->add_option("--input", transform.input_path, "input CSV")->required();
    transform_cmd->add_option("--w", transform.w_path, "projection CSV (d x p)")->required();
    transform_cmd->add_flag("--labeled", transform.labeled, "input carries a label column");
    transform_cmd->add_flag("--header", transform.header, "skip the first line of the input");
    transform_cmd->add_option("--out", transform.out_file, "output CSV path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (*synth_cmd) return cmd_synth(synth);
        if (*fit_cmd) return cmd_fit(fit);
        if (*gradcheck_cmd) return cmd_gradcheck(gradcheck);
        if (*eval_cmd) return cmd_eval(eval);
        if (*transform_cmd) return cmd_transform(transform);
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::runtime_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
