// wtad: command-line front end for the anomaly-detection toolkit.
// Subcommands wire the pipeline: simulate -> ingest -> train -> score /
// predict -> evaluate -> tune -> report. Every output gets a sidecar
// .manifest.json recording command line, input digests and seeds.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "wtad/csv.hpp"
#include "wtad/density_net.hpp"
#include "wtad/errors.hpp"
#include "wtad/eval.hpp"
#include "wtad/manifest.hpp"
#include "wtad/ocsvm.hpp"
#include "wtad/plant.hpp"
#include "wtad/tune.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Timer {
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    }
};

std::string join_argv(int argc, char** argv) {
    std::string s;
    for (int i = 0; i < argc; ++i) {
        if (i) s += ' ';
        s += argv[i];
    }
    return s;
}

json load_config(const fs::path& path, const std::vector<std::string>& overrides) {
    std::ifstream in(path);
    if (!in) throw wtad::DataError("cannot open config '" + path.string() + "'");
    json cfg;
    try {
        in >> cfg;
    } catch (const json::exception& e) {
        throw wtad::DataError("config '" + path.string() + "': " + e.what());
    }
    for (const auto& kv : overrides) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos)
            throw wtad::DataError("--set expects key=value, got '" + kv + "'");
        const std::string key = kv.substr(0, eq);
        const std::string val = kv.substr(eq + 1);
        try {
            cfg[key] = json::parse(val);
        } catch (const json::exception&) {
            cfg[key] = val;  // unquoted strings
        }
    }
    return cfg;
}

wtad::ActuatorEncoding encoding_from_string(const std::string& s) {
    if (s == "one-hot") return wtad::ActuatorEncoding::OneHot;
    if (s == "ordinal") return wtad::ActuatorEncoding::Ordinal;
    throw wtad::DataError("unknown actuator encoding '" + s + "'");
}

wtad::DensityNetConfig dnn_config_from_json(const json& j) {
    wtad::DensityNetConfig c;
    c.hidden_dim = j.value("hidden_dim", c.hidden_dim);
    c.truncation_len = j.value("truncation_len", c.truncation_len);
    c.batch_size = j.value("batch_size", c.batch_size);
    c.learning_rate = j.value("learning_rate", c.learning_rate);
    c.epochs = j.value("epochs", c.epochs);
    c.variance_floor = j.value("variance_floor", c.variance_floor);
    c.seed = j.value("seed", c.seed);
    return c;
}

wtad::SvmConfig svm_config_from_json(const json& j) {
    wtad::SvmConfig c;
    c.w = j.value("w", c.w);
    c.nu = j.value("nu", c.nu);
    c.gamma = j.value("gamma", c.gamma);
    c.solver_tol = j.value("solver_tol", c.solver_tol);
    c.max_iter = j.value("max_iter", c.max_iter);
    c.encoding = encoding_from_string(j.value("encoding", std::string("one-hot")));
    return c;
}

json report_to_json(const wtad::EvalReport& r) {
    json j;
    j["precision"] = r.precision;
    j["recall"] = r.recall;
    j["f_measure"] = r.f_measure;
    j["counting_mode"] =
        r.counting_mode == wtad::CountingMode::PerEntry ? "entry" : "window";
    j["false_alarm_rate"] = r.false_alarm_rate;
    j["tp"] = r.tp;
    j["fp"] = r.fp;
    j["fn"] = r.fn;
    j["tn"] = r.tn;
    if (r.auc) j["auc"] = *r.auc;
    else j["auc_error"] = "undefined: a class is absent";
    if (r.threshold) j["threshold"] = *r.threshold;
    j["per_attack_recall"] = json::object();
    for (const auto& [id, rec] : r.per_attack_recall)
        j["per_attack_recall"][std::to_string(id)] = rec;
    return j;
}

void print_report(const wtad::EvalReport& r) {
    std::printf("mode            %s\n",
                r.counting_mode == wtad::CountingMode::PerEntry ? "per-entry"
                                                                : "per-window");
    std::printf("precision       %.5f\n", r.precision);
    std::printf("recall          %.5f\n", r.recall);
    std::printf("f_measure       %.5f\n", r.f_measure);
    if (r.auc) std::printf("auc             %.5f\n", *r.auc);
    else std::printf("auc             undefined (a class is absent)\n");
    std::printf("false_alarms    %.5f\n", r.false_alarm_rate);
    for (const auto& [id, rec] : r.per_attack_recall)
        std::printf("recall[attack %d] %.5f\n", id, rec);
}

void write_manifest(wtad::RunManifest manifest, const fs::path& out, double seconds) {
    manifest.wall_clock_seconds = seconds;
    manifest.write(out.string() + ".manifest.json");
}

std::vector<wtad::Label> labels_of(const wtad::Log& log) {
    std::vector<wtad::Label> labels;
    labels.reserve(log.size());
    for (const auto& e : log.entries) labels.push_back(e.label);
    return labels;
}

void write_cells_csv(const std::vector<wtad::GridCell>& cells, const fs::path& path) {
    std::ofstream out(path);
    if (!out) throw wtad::DataError("cannot write '" + path.string() + "'");
    out << "w,nu,gamma,f_measure,converged\n";
    for (const auto& c : cells) {
        out << c.w << ',' << c.nu << ',' << c.gamma << ',';
        if (c.converged) out << c.f_measure;
        else out << "NaN";
        out << ',' << (c.converged ? 1 : 0) << '\n';
    }
}

int run(int argc, char** argv) {
    CLI::App app{"Unsupervised anomaly detection for control-system logs"};
    app.require_subcommand(1);
    app.fallthrough(true);  // allow global options after the subcommand
    std::optional<std::uint64_t> global_seed;
    app.add_option("--seed", global_seed, "Override every configured seed");

    // simulate
    auto* sim = app.add_subcommand("simulate", "Run the plant simulator");
    std::string sim_scenario, sim_out, sim_suite_dir;
    sim->add_option("--scenario", sim_scenario, "Scenario JSON (plant + attacks)");
    sim->add_option("--out", sim_out, "Output log CSV");
    sim->add_option("--suite-dir", sim_suite_dir,
                    "Write the standard scenario suite into this directory");

    // ingest
    auto* ing = app.add_subcommand("ingest", "Re-emit a CSV log in native format");
    std::string ing_in, ing_format = "native", ing_schema, ing_out;
    ing->add_option("--in", ing_in)->required();
    ing->add_option("--format", ing_format, "native or swat-layout")
        ->check(CLI::IsMember({"native", "swat-layout"}));
    ing->add_option("--schema", ing_schema, "Schema sidecar (swat-layout only)");
    ing->add_option("--out", ing_out)->required();

    // train-dnn
    auto* tdnn = app.add_subcommand("train-dnn", "Train the density net");
    std::string tdnn_config, tdnn_train, tdnn_out, tdnn_stamp = "0";
    std::vector<std::string> tdnn_set;
    tdnn->add_option("--config", tdnn_config)->required();
    tdnn->add_option("--train", tdnn_train)->required();
    tdnn->add_option("--out", tdnn_out)->required();
    tdnn->add_option("--set", tdnn_set, "key=value config override");
    tdnn->add_option("--stamp", tdnn_stamp, "Creation stamp stored in the model header");

    // score
    auto* sc = app.add_subcommand("score", "Score a log with a density net");
    std::string sc_model, sc_log, sc_out;
    sc->add_option("--model", sc_model)->required();
    sc->add_option("--log", sc_log)->required();
    sc->add_option("--out", sc_out)->required();

    // train-svm
    auto* tsvm = app.add_subcommand("train-svm", "Train the one-class SVM");
    std::string tsvm_config, tsvm_train, tsvm_out, tsvm_stamp = "0";
    std::vector<std::string> tsvm_set;
    tsvm->add_option("--config", tsvm_config)->required();
    tsvm->add_option("--train", tsvm_train)->required();
    tsvm->add_option("--out", tsvm_out)->required();
    tsvm->add_option("--set", tsvm_set, "key=value config override");
    tsvm->add_option("--stamp", tsvm_stamp, "Creation stamp stored in the model header");

    // predict
    auto* pr = app.add_subcommand("predict", "Classify windows with a trained SVM");
    std::string pr_model, pr_log, pr_out;
    pr->add_option("--model", pr_model)->required();
    pr->add_option("--log", pr_log)->required();
    pr->add_option("--out", pr_out)->required();

    // evaluate
    auto* ev = app.add_subcommand("evaluate", "Compute metrics for traces or verdicts");
    std::string ev_mode, ev_trace, ev_verdicts, ev_log, ev_out;
    std::optional<double> ev_threshold;
    int ev_w = 0;
    ev->add_option("--mode", ev_mode, "entry or window")
        ->required()
        ->check(CLI::IsMember({"entry", "window"}));
    ev->add_option("--trace", ev_trace, "Score trace CSV (entry mode)");
    ev->add_option("--verdicts", ev_verdicts, "Verdict CSV (window mode)");
    ev->add_option("--log", ev_log, "Labeled log CSV")->required();
    ev->add_option("--threshold", ev_threshold,
                   "Entry mode: fixed threshold (default: best-F sweep)");
    ev->add_option("--w", ev_w, "Window size used for the verdicts");
    ev->add_option("--out", ev_out, "Report JSON path");

    // tune
    auto* tu = app.add_subcommand("tune", "Hyper-parameter search");
    auto* tu_svm = tu->add_subcommand("svm", "Grid or random search for the SVM");
    std::string tu_grid, tu_random, tu_train, tu_eval, tu_out;
    tu_svm->add_option("--grid", tu_grid, "Grid spec JSON");
    tu_svm->add_option("--random", tu_random, "Random search spec JSON");
    tu_svm->add_option("--train", tu_train)->required();
    tu_svm->add_option("--eval", tu_eval)->required();
    tu_svm->add_option("--out", tu_out)->required();
    auto* tu_dnn = tu->add_subcommand("dnn", "Epoch/threshold selection");
    std::string td_traces, td_log, td_out;
    tu_dnn->add_option("--traces", td_traces, "Directory of per-epoch trace CSVs")
        ->required();
    tu_dnn->add_option("--log", td_log, "Labeled log CSV")->required();
    tu_dnn->add_option("--out", td_out)->required();

    // report
    auto* rep = app.add_subcommand("report", "Summarize a run directory");
    std::string rep_dir;
    rep->add_option("--run-dir", rep_dir)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    Timer timer;
    wtad::RunManifest manifest;
    manifest.command_line = join_argv(argc, argv);
    manifest.tool_version = wtad::kToolVersion;
    if (global_seed) manifest.seeds.push_back("--seed " + std::to_string(*global_seed));

    if (sim->parsed()) {
        if (!sim_suite_dir.empty()) {
            const std::uint64_t seed = global_seed.value_or(1);
            fs::create_directories(sim_suite_dir);
            for (const auto& scenario : wtad::standard_scenario_suite(seed)) {
                const fs::path base = fs::path(sim_suite_dir) / scenario.name;
                if (scenario.attacks.empty()) {
                    wtad::write_csv(scenario.train, base.string() + ".csv");
                } else {
                    wtad::write_csv(scenario.test, base.string() + ".csv");
                }
            }
            manifest.seeds.push_back("suite-seed " + std::to_string(seed));
            write_manifest(manifest, fs::path(sim_suite_dir) / "suite", timer.seconds());
            return 0;
        }
        if (sim_scenario.empty() || sim_out.empty())
            throw wtad::DataError("simulate needs --scenario and --out (or --suite-dir)");
        wtad::ScenarioFile sf = wtad::read_scenario_json(sim_scenario);
        if (global_seed) sf.plant.seed = *global_seed;
        manifest.add_config(sim_scenario);
        manifest.seeds.push_back("plant-seed " + std::to_string(sf.plant.seed));
        wtad::write_csv(wtad::simulate(sf.plant, sf.attacks), sim_out);
        write_manifest(manifest, sim_out, timer.seconds());
        return 0;
    }

    if (ing->parsed()) {
        wtad::CsvFormat fmt;
        if (ing_format == "native") fmt = wtad::CsvFormat::Native;
        else if (ing_format == "swat-layout") fmt = wtad::CsvFormat::SwatLayout;
        else throw wtad::DataError("unknown --format '" + ing_format + "'");
        std::optional<fs::path> schema;
        if (!ing_schema.empty()) {
            schema = ing_schema;
            manifest.add_config(ing_schema);
        }
        manifest.add_input(ing_in);
        const wtad::Log log = wtad::ingest_csv(ing_in, fmt, schema);
        log.validate();
        wtad::write_csv(log, ing_out);
        write_manifest(manifest, ing_out, timer.seconds());
        return 0;
    }

    if (tdnn->parsed()) {
        json cfg = load_config(tdnn_config, tdnn_set);
        wtad::DensityNetConfig config = dnn_config_from_json(cfg);
        if (global_seed) config.seed = *global_seed;
        manifest.add_config(tdnn_config);
        manifest.add_input(tdnn_train);
        manifest.seeds.push_back("dnn-seed " + std::to_string(config.seed));
        const wtad::Log train_log = wtad::ingest_csv(tdnn_train, wtad::CsvFormat::Native);
        const wtad::TrainResult result = wtad::train(config, train_log);
        wtad::save_net(result.net, tdnn_out, tdnn_stamp);
        for (std::size_t e = 0; e < result.epoch_mean_cost.size(); ++e)
            std::printf("epoch %zu mean cost %.6f\n", e + 1, result.epoch_mean_cost[e]);
        write_manifest(manifest, tdnn_out, timer.seconds());
        return 0;
    }

    if (sc->parsed()) {
        manifest.add_input(sc_model);
        manifest.add_input(sc_log);
        const wtad::DensityNet net = wtad::load_net(sc_model);
        wtad::Log log = wtad::ingest_csv(sc_log, wtad::CsvFormat::Native);
        log = wtad::normalize(log, net.train_stats);  // training-stats policy
        const wtad::ScoreTrace trace = wtad::outlier_factors(net, log);
        wtad::write_trace_csv(trace, log, sc_out);
        write_manifest(manifest, sc_out, timer.seconds());
        return 0;
    }

    if (tsvm->parsed()) {
        json cfg = load_config(tsvm_config, tsvm_set);
        const wtad::SvmConfig config = svm_config_from_json(cfg);
        manifest.add_config(tsvm_config);
        manifest.add_input(tsvm_train);
        wtad::Log train_log = wtad::ingest_csv(tsvm_train, wtad::CsvFormat::Native);
        train_log = wtad::normalize(train_log, wtad::compute_norm_stats(train_log));
        const auto windows = wtad::extract_windows(train_log, config.w, config.encoding);
        const wtad::SvmModel model = wtad::train_svm(config, windows);
        wtad::save_svm(model, tsvm_out, tsvm_stamp);
        std::printf("support vectors: %ld of %zu windows\n",
                    static_cast<long>(model.alphas.size()), windows.size());
        write_manifest(manifest, tsvm_out, timer.seconds());
        return 0;
    }

    if (pr->parsed()) {
        manifest.add_input(pr_model);
        manifest.add_input(pr_log);
        const wtad::SvmModel model = wtad::load_svm(pr_model);
        wtad::Log log = wtad::ingest_csv(pr_log, wtad::CsvFormat::Native);
        log = wtad::normalize(log, wtad::compute_norm_stats(log));  // own-stats policy
        const auto windows = wtad::extract_windows(log, model.w, model.encoding);
        const auto verdicts = wtad::predict(model, windows);
        wtad::export_verdicts(verdicts, wtad::window_labels(windows), pr_out);
        write_manifest(manifest, pr_out, timer.seconds());
        return 0;
    }

    if (ev->parsed()) {
        const wtad::Log log = wtad::ingest_csv(ev_log, wtad::CsvFormat::Native);
        manifest.add_input(ev_log);
        wtad::EvalReport report;
        if (ev_mode == "entry") {
            if (ev_trace.empty()) throw wtad::DataError("entry mode needs --trace");
            manifest.add_input(ev_trace);
            wtad::ScoreTrace trace;
            trace.factors = wtad::read_scores_csv(ev_trace);
            trace.breakdown.resize(0, 0);
            const auto labels = labels_of(log);
            double threshold;
            if (ev_threshold) {
                threshold = *ev_threshold;
            } else {
                if (trace.factors.size() != labels.size())
                    throw wtad::DataError("trace and log lengths differ");
                threshold = wtad::threshold_sweep(trace.factors, labels).best_threshold;
            }
            report = wtad::evaluate_dnn(trace, labels, threshold);
        } else if (ev_mode == "window") {
            if (ev_verdicts.empty()) throw wtad::DataError("window mode needs --verdicts");
            manifest.add_input(ev_verdicts);
            const auto verdicts = wtad::read_verdicts_csv(ev_verdicts);
            const int w = ev_w > 0
                              ? ev_w
                              : static_cast<int>(log.size()) -
                                    static_cast<int>(verdicts.size()) + 1;
            if (w < 1) throw wtad::DataError("verdict count exceeds log length");
            const auto windows = wtad::extract_windows(log, w);
            report = wtad::evaluate_svm(verdicts, wtad::window_labels(windows));
        } else {
            throw wtad::DataError("--mode must be entry or window");
        }
        print_report(report);
        if (!ev_out.empty()) {
            std::ofstream out(ev_out);
            out << report_to_json(report).dump(2) << '\n';
            write_manifest(manifest, ev_out, timer.seconds());
        }
        return 0;
    }

    if (tu_svm->parsed()) {
        const wtad::Log train_log = wtad::ingest_csv(tu_train, wtad::CsvFormat::Native);
        const wtad::Log eval_log = wtad::ingest_csv(tu_eval, wtad::CsvFormat::Native);
        manifest.add_input(tu_train);
        manifest.add_input(tu_eval);
        std::vector<wtad::GridCell> cells;
        if (!tu_grid.empty()) {
            json g = load_config(tu_grid, {});
            manifest.add_config(tu_grid);
            wtad::GridSpec spec;
            spec.w_values = g.at("w_values").get<std::vector<int>>();
            spec.nu_values = g.at("nu_values").get<std::vector<double>>();
            spec.gamma_values = g.at("gamma_values").get<std::vector<double>>();
            spec.encoding =
                encoding_from_string(g.value("encoding", std::string("one-hot")));
            spec.solver_tol = g.value("solver_tol", spec.solver_tol);
            spec.max_iter = g.value("max_iter", spec.max_iter);
            cells = wtad::grid_search(spec, train_log, eval_log);
        } else if (!tu_random.empty()) {
            json r = load_config(tu_random, {});
            manifest.add_config(tu_random);
            wtad::RandomSearchSpec spec;
            spec.w = r.value("w", spec.w);
            spec.scale = r.value("scale", spec.scale);
            spec.trials = r.value("trials", spec.trials);
            spec.seed = r.value("seed", spec.seed);
            spec.encoding =
                encoding_from_string(r.value("encoding", std::string("one-hot")));
            if (global_seed) spec.seed = *global_seed;
            manifest.seeds.push_back("search-seed " + std::to_string(spec.seed));
            const auto result = wtad::random_search(spec, train_log, eval_log);
            std::printf("best: w=%d nu=%.10g gamma=%.10g F=%.5f\n",
                        result.best_config.w, result.best_config.nu,
                        result.best_config.gamma, result.best_f);
            cells = result.trials;
        } else {
            throw wtad::DataError("tune svm needs --grid or --random");
        }
        write_cells_csv(cells, tu_out);
        write_manifest(manifest, tu_out, timer.seconds());
        return 0;
    }

    if (tu_dnn->parsed()) {
        const wtad::Log log = wtad::ingest_csv(td_log, wtad::CsvFormat::Native);
        manifest.add_input(td_log);
        std::vector<fs::path> files;
        for (const auto& entry : fs::directory_iterator(td_traces))
            if (entry.path().extension() == ".csv") files.push_back(entry.path());
        std::sort(files.begin(), files.end());
        if (files.empty())
            throw wtad::DataError("no trace CSVs in '" + td_traces + "'");
        std::vector<std::vector<double>> traces;
        for (const auto& f : files) {
            manifest.add_input(f);
            traces.push_back(wtad::read_scores_csv(f));
        }
        const auto point = wtad::select_dnn_operating_point(traces, labels_of(log));
        std::ofstream out(td_out);
        out << "epoch,file,threshold,f_measure\n"
            << point.epoch << ',' << files[static_cast<std::size_t>(point.epoch)].string()
            << ',' << point.threshold << ',' << point.f_measure << '\n';
        std::printf("best epoch %d (%s) threshold %.6g F %.5f\n", point.epoch,
                    files[static_cast<std::size_t>(point.epoch)].string().c_str(),
                    point.threshold, point.f_measure);
        write_manifest(manifest, td_out, timer.seconds());
        return 0;
    }

    if (rep->parsed()) {
        const fs::path dir = rep_dir;
        const fs::path log_path = dir / "test.csv";
        if (!fs::exists(log_path))
            throw wtad::DataError("run dir is missing test.csv");
        const wtad::Log log = wtad::ingest_csv(log_path, wtad::CsvFormat::Native);
        manifest.add_input(log_path);
        json summary;
        const fs::path trace_path = dir / "trace.csv";
        if (fs::exists(trace_path)) {
            manifest.add_input(trace_path);
            wtad::ScoreTrace trace;
            trace.factors = wtad::read_scores_csv(trace_path);
            const auto labels = labels_of(log);
            const double threshold =
                wtad::threshold_sweep(trace.factors, labels).best_threshold;
            summary["dnn"] = report_to_json(wtad::evaluate_dnn(trace, labels, threshold));
        }
        const fs::path verdict_path = dir / "verdicts.csv";
        if (fs::exists(verdict_path)) {
            manifest.add_input(verdict_path);
            const auto verdicts = wtad::read_verdicts_csv(verdict_path);
            const int w = static_cast<int>(log.size()) -
                          static_cast<int>(verdicts.size()) + 1;
            if (w < 1) throw wtad::DataError("verdict count exceeds log length");
            const auto windows = wtad::extract_windows(log, w);
            summary["svm"] = report_to_json(
                wtad::evaluate_svm(verdicts, wtad::window_labels(windows)));
        }
        if (summary.empty())
            throw wtad::DataError("run dir has neither trace.csv nor verdicts.csv");
        std::ofstream out(dir / "summary.json");
        out << summary.dump(2) << '\n';
        std::ofstream csv(dir / "summary.csv");
        csv << "detector,metric,value\n";
        for (const auto& [det, rep_json] : summary.items())
            for (const auto& [key, val] : rep_json.items())
                if (val.is_number())
                    csv << det << ',' << key << ',' << val.dump() << '\n';
        write_manifest(manifest, dir / "summary.json", timer.seconds());
        std::printf("wrote %s\n", (dir / "summary.json").string().c_str());
        return 0;
    }

    return 1;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const wtad::NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << '\n';
        return 3;
    } catch (const wtad::DataError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
}
