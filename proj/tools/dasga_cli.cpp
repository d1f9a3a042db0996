// Batch experiment harness: runs DASGA and the reference predictors over
// datasets, label-ratio sweeps, and parameter grids; emits flat CSV results
// and plot-ready spectra. All commands are deterministic given config + seeds
// (runtime measurement is off by default to keep output files byte-stable).

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "dasga/dasga.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string fmt(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
    std::uint64_t x = seed + 0x9e3779b97f4a7c15ULL * (salt + 1);
    x ^= x >> 30;
    x *= 0xbf58476d1ce4e5b9ULL;
    x ^= x >> 27;
    return x;
}

struct DatasetConfig {
    std::string preset;  // synth1 / synth2; empty for file-based data
    std::uint64_t preset_seed = 1;
    int n_per_class = 100;
    std::string source_features, source_labels, target_features, target_labels;
    std::string source_edges, target_edges;
    bool features_header = false;
    dasga::Task task = dasga::Task::Classification;
};

struct GraphConfig {
    int k = 25;
    double kernel_scale = 0.0;  // <= 0: auto
};

struct ExperimentConfig {
    DatasetConfig dataset;
    GraphConfig graph;
    dasga::AlignmentParams align;
    int pairs = 0;  // matched pairs for init; 0 = default policy
    std::vector<std::string> methods = {"dasga", "ssl", "nn"};
    std::vector<double> label_ratios = {0.05};
    int seeds = 10;
    double source_label_ratio = 1.0;
    bool timing = false;
    bool histories = true;
    std::optional<std::pair<double, double>> clamp;
    bool round_predictions = false;
    std::vector<double> sweep_mu1, sweep_mu2;
    std::vector<int> sweep_k, sweep_r;
    int spectra_R = 0;  // 0 = full basis
};

template <typename T>
T get_or(const json& obj, const std::string& key, T fallback) {
    if (obj.contains(key)) return obj.at(key).get<T>();
    return fallback;
}

ExperimentConfig parse_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw dasga::config_error("cannot open config " + path);
    json root;
    try {
        root = json::parse(in);
    } catch (const json::exception& e) {
        throw dasga::config_error("config " + path + ": " + e.what());
    }

    ExperimentConfig cfg;
    if (root.contains("dataset")) {
        const json& d = root["dataset"];
        cfg.dataset.preset = get_or<std::string>(d, "preset", "");
        cfg.dataset.preset_seed = get_or<std::uint64_t>(d, "preset_seed", 1);
        cfg.dataset.n_per_class = get_or<int>(d, "n_per_class", 100);
        cfg.dataset.source_features = get_or<std::string>(d, "source_features", "");
        cfg.dataset.source_labels = get_or<std::string>(d, "source_labels", "");
        cfg.dataset.target_features = get_or<std::string>(d, "target_features", "");
        cfg.dataset.target_labels = get_or<std::string>(d, "target_labels", "");
        cfg.dataset.source_edges = get_or<std::string>(d, "source_edges", "");
        cfg.dataset.target_edges = get_or<std::string>(d, "target_edges", "");
        cfg.dataset.features_header = get_or<bool>(d, "features_header", false);
        const auto task = get_or<std::string>(d, "task", "classification");
        if (task == "classification") cfg.dataset.task = dasga::Task::Classification;
        else if (task == "regression") cfg.dataset.task = dasga::Task::Regression;
        else throw dasga::config_error("dataset.task must be classification or regression");
    }
    if (root.contains("graph")) {
        cfg.graph.k = get_or<int>(root["graph"], "k", 25);
        cfg.graph.kernel_scale = get_or<double>(root["graph"], "kernel_scale", 0.0);
    }
    if (root.contains("align")) {
        const json& a = root["align"];
        cfg.align.mu1 = get_or<double>(a, "mu1", 0.1);
        cfg.align.mu2 = get_or<double>(a, "mu2", 1.0);
        cfg.align.sigma = get_or<double>(a, "sigma", 0.0);
        cfg.align.R = get_or<int>(a, "R", 9);
        cfg.align.max_outer_iters = get_or<int>(a, "max_outer_iters", 50);
        cfg.align.outer_tol = get_or<double>(a, "outer_tol", 1e-6);
        cfg.pairs = get_or<int>(a, "pairs", 0);
    }
    if (root.contains("experiment")) {
        const json& e = root["experiment"];
        cfg.methods = get_or<std::vector<std::string>>(e, "methods", cfg.methods);
        cfg.label_ratios = get_or<std::vector<double>>(e, "label_ratios", cfg.label_ratios);
        cfg.seeds = get_or<int>(e, "seeds", cfg.seeds);
        cfg.source_label_ratio = get_or<double>(e, "source_label_ratio", 1.0);
        cfg.timing = get_or<bool>(e, "timing", false);
        cfg.histories = get_or<bool>(e, "histories", true);
        cfg.round_predictions = get_or<bool>(e, "round", false);
        if (e.contains("clamp")) {
            const auto c = e["clamp"].get<std::vector<double>>();
            if (c.size() != 2) throw dasga::config_error("experiment.clamp must be [lo, hi]");
            cfg.clamp = {{c[0], c[1]}};
        }
        cfg.spectra_R = get_or<int>(e, "spectra_R", 0);
    }
    if (root.contains("sweep")) {
        const json& s = root["sweep"];
        cfg.sweep_mu1 = get_or<std::vector<double>>(s, "mu1", {});
        cfg.sweep_mu2 = get_or<std::vector<double>>(s, "mu2", {});
        cfg.sweep_k = get_or<std::vector<int>>(s, "k", {});
        cfg.sweep_r = get_or<std::vector<int>>(s, "r", {});
    }
    return cfg;
}

void validate_config(const ExperimentConfig& cfg, bool for_sweep) {
    const DatasetConfig& d = cfg.dataset;
    const bool preset = !d.preset.empty();
    const bool files = !d.source_labels.empty();
    if (!preset && !files)
        throw dasga::config_error("dataset: need a preset or source/target label files");
    if (preset && d.preset != "synth1" && d.preset != "synth2")
        throw dasga::config_error("dataset.preset must be synth1 or synth2");
    for (const std::string& p :
         {d.source_features, d.source_labels, d.target_features, d.target_labels, d.source_edges,
          d.target_edges}) {
        if (!p.empty() && !fs::exists(p))
            throw dasga::config_error("dataset file does not exist: " + p);
    }
    if (files) {
        if (d.target_labels.empty()) throw dasga::config_error("dataset: target_labels missing");
        const bool s_graph = !d.source_features.empty() || !d.source_edges.empty();
        const bool t_graph = !d.target_features.empty() || !d.target_edges.empty();
        if (!s_graph || !t_graph)
            throw dasga::config_error("dataset: each domain needs features or an edge list");
    }
    if (cfg.methods.empty()) throw dasga::config_error("experiment.methods is empty");
    for (const std::string& m : cfg.methods) {
        if (m != "dasga" && m != "ssl" && m != "nn")
            throw dasga::config_error("unknown method `" + m + "`");
    }
    if (cfg.label_ratios.empty()) throw dasga::config_error("experiment.label_ratios is empty");
    for (const double r : cfg.label_ratios) {
        if (r <= 0.0 || r > 1.0) throw dasga::config_error("label_ratio must be in (0, 1]");
    }
    if (cfg.seeds < 1) throw dasga::config_error("experiment.seeds must be positive");
    dasga::validate_params(cfg.align);
    if (for_sweep && cfg.sweep_mu1.empty() && cfg.sweep_k.empty() && cfg.sweep_r.empty())
        throw dasga::config_error("sweep: no axis configured");
    if (for_sweep && (cfg.sweep_mu1.empty() != cfg.sweep_mu2.empty()))
        throw dasga::config_error("sweep: mu1 and mu2 axes must be given together");
}

struct DomainData {
    dasga::LabeledDataset dataset;
    bool graph_from_file = false;
    std::map<int, dasga::Graph> graph_by_k;
};

struct LoadedData {
    DomainData source, target;
};

LoadedData load_data(const ExperimentConfig& cfg) {
    LoadedData data;
    const DatasetConfig& d = cfg.dataset;
    if (!d.preset.empty()) {
        auto [src, tgt] = dasga::synth_preset(d.preset, d.preset_seed, d.n_per_class);
        data.source.dataset = std::move(src);
        data.target.dataset = std::move(tgt);
        return data;
    }
    auto load_domain = [&](const std::string& feat, const std::string& lab,
                           const std::string& edges) {
        DomainData dom;
        dom.dataset.task = d.task;
        dom.dataset.labels = dasga::load_labels(lab, d.features_header);
        if (!feat.empty()) dom.dataset.features = dasga::load_csv_features(feat, d.features_header);
        if (!edges.empty()) {
            dom.dataset.graph = dasga::load_edge_list(edges);
            dom.graph_from_file = true;
        }
        const int n = dom.dataset.size();
        if (dom.dataset.features && dom.dataset.features->rows() != n)
            throw dasga::config_error("feature/label count mismatch for " + lab);
        if (dom.dataset.graph && dom.dataset.graph->n != n)
            throw dasga::config_error("graph/label count mismatch for " + lab);
        return dom;
    };
    data.source = load_domain(d.source_features, d.source_labels, d.source_edges);
    data.target = load_domain(d.target_features, d.target_labels, d.target_edges);
    return data;
}

// Graphs are built serially before any parallel section; lookups afterwards
// are read-only.
const dasga::Graph& ensure_graph(DomainData& dom, const GraphConfig& gc, int k) {
    if (dom.graph_from_file) return *dom.dataset.graph;
    auto it = dom.graph_by_k.find(k);
    if (it == dom.graph_by_k.end()) {
        if (!dom.dataset.features)
            throw dasga::config_error("domain has neither features nor a graph");
        it = dom.graph_by_k
                 .emplace(k, dasga::build_knn_graph(*dom.dataset.features, k, gc.kernel_scale))
                 .first;
    }
    return it->second;
}

dasga::LabelSet make_label_set(const dasga::LabeledDataset& dataset, const std::vector<int>& known,
                               dasga::LabelEncoding encoding) {
    dasga::LabelSet ls;
    ls.indices = known;
    ls.values.resize(static_cast<Eigen::Index>(known.size()));
    for (size_t i = 0; i < known.size(); ++i)
        ls.values[static_cast<Eigen::Index>(i)] = dataset.labels[known[i]];
    ls.encoding = encoding;
    return ls;
}

std::vector<double> distinct_values(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    std::set<double> s(a.begin(), a.end());
    s.insert(b.begin(), b.end());
    return {s.begin(), s.end()};
}

dasga::ExperimentSplit full_split(int n, double ratio) {
    dasga::ExperimentSplit split;
    split.label_ratio = ratio;
    split.known.resize(n);
    for (int i = 0; i < n; ++i) split.known[i] = i;
    return split;
}

struct TrialOutcome {
    bool ok = true;
    std::string error;
    double misclassification = std::nan("");
    double rms = std::nan("");
    double runtime_ms = 0.0;
    double objective_final = std::nan("");
    int outer_iters = 0;
    std::vector<double> history;
};

// One (method, ratio, seed) cell over precomputed immutable inputs.
TrialOutcome run_trial(const ExperimentConfig& cfg, const std::string& method,
                       const dasga::LabeledDataset& src, const dasga::LabeledDataset& tgt,
                       const dasga::SpectralBasis* basis_s, const dasga::SpectralBasis* basis_t,
                       const dasga::Graph* graph_t, const dasga::ExperimentSplit& split_s,
                       const dasga::ExperimentSplit& split_t, const dasga::AlignmentParams& params,
                       std::uint64_t seed) {
    TrialOutcome out;
    const auto t_start = std::chrono::steady_clock::now();
    try {
        const bool classify = tgt.task == dasga::Task::Classification;
        Eigen::VectorXd predicted;

        if (method == "dasga") {
            const auto encoding =
                classify ? dasga::LabelEncoding::Binary : dasga::LabelEncoding::Regression;
            dasga::LabelSet ls = make_label_set(src, split_s.known, encoding);
            dasga::LabelSet lt = make_label_set(tgt, split_t.known, encoding);
            const auto classes = distinct_values(src.labels, tgt.labels);
            if (classify && classes.size() == 2) {
                auto to_pm1 = [&](dasga::LabelSet& set) {
                    for (Eigen::Index i = 0; i < set.values.size(); ++i)
                        set.values[i] = set.values[i] == classes[1] ? 1.0 : -1.0;
                };
                to_pm1(ls);
                to_pm1(lt);
                auto problem = dasga::make_alignment_problem(*basis_s, *basis_t, ls, lt, params);
                auto result = dasga::run(problem, seed, nullptr, cfg.pairs);
                const Eigen::VectorXd signs = dasga::decode_binary(result.f_t);
                predicted.resize(signs.size());
                for (Eigen::Index i = 0; i < signs.size(); ++i)
                    predicted[i] = signs[i] > 0 ? classes[1] : classes[0];
                out.objective_final = result.history.back();
                out.outer_iters = result.outer_iters;
                out.history = std::move(result.history);
            } else if (classify) {
                ls.encoding = dasga::LabelEncoding::OneVsAll;
                lt.encoding = dasga::LabelEncoding::OneVsAll;
                auto problem = dasga::make_alignment_problem(*basis_s, *basis_t, ls, lt, params);
                auto ova = dasga::run_one_vs_all(problem, seed, cfg.pairs);
                predicted = ova.decoded_t;
                out.objective_final = 0.0;
                for (const auto& r : ova.runs) {
                    out.objective_final += r.history.back();
                    out.outer_iters = std::max(out.outer_iters, r.outer_iters);
                }
                out.history = ova.runs.front().history;
            } else {
                auto problem = dasga::make_alignment_problem(*basis_s, *basis_t, ls, lt, params);
                auto result = dasga::run(problem, seed, nullptr, cfg.pairs);
                predicted = dasga::decode_regression(result.f_t, cfg.clamp, cfg.round_predictions);
                out.objective_final = result.history.back();
                out.outer_iters = result.outer_iters;
                out.history = std::move(result.history);
            }
        } else if (method == "ssl") {
            dasga::LabelSet lt = make_label_set(tgt, split_t.known, dasga::LabelEncoding::Binary);
            if (classify) {
                predicted = dasga::ssl_one_vs_all(*graph_t, lt);
            } else {
                predicted = dasga::decode_regression(dasga::ssl_gaussian_fields(*graph_t, lt).f,
                                                     cfg.clamp, cfg.round_predictions);
            }
        } else {  // nn
            if (!src.features || !tgt.features)
                throw dasga::config_error("nn requires features in both domains");
            const auto train_n =
                static_cast<Eigen::Index>(split_s.known.size() + split_t.known.size());
            dasga::FeatureMatrix train(train_n, src.features->cols());
            Eigen::VectorXd train_labels(train_n);
            Eigen::Index r = 0;
            for (const int i : split_s.known) {
                train.row(r) = src.features->row(i);
                train_labels[r++] = src.labels[i];
            }
            for (const int i : split_t.known) {
                train.row(r) = tgt.features->row(i);
                train_labels[r++] = tgt.labels[i];
            }
            predicted = dasga::nearest_neighbor(train, train_labels, *tgt.features);
            if (!classify)
                predicted = dasga::decode_regression(predicted, cfg.clamp, cfg.round_predictions);
        }

        out.misclassification =
            dasga::misclassification_rate(predicted, tgt.labels, split_t.hidden);
        out.rms = dasga::rms_error(predicted, tgt.labels, split_t.hidden);
    } catch (const std::exception& e) {
        out.ok = false;
        out.error = e.what();
    }
    if (cfg.timing) {
        out.runtime_ms =
            std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t_start)
                .count();
    }
    return out;
}

void parallel_for(int n, int workers, const std::function<void(int)>& fn) {
    if (workers <= 1 || n <= 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    const int count = std::min(workers, n);
    pool.reserve(count);
    for (int w = 0; w < count; ++w) {
        pool.emplace_back([&] {
            for (int i; (i = next.fetch_add(1)) < n;) fn(i);
        });
    }
    for (auto& t : pool) t.join();
}

struct TrialSpec {
    std::string method;
    double ratio;
    int seed;
    dasga::AlignmentParams params;
    int k;
};

struct PrecomputedInputs {
    // keyed caches built serially, read-only afterwards
    std::map<std::pair<int, int>, std::pair<dasga::SpectralBasis, dasga::SpectralBasis>> bases;
    std::map<std::pair<double, int>, std::pair<dasga::ExperimentSplit, dasga::ExperimentSplit>>
        splits;
};

PrecomputedInputs precompute(const ExperimentConfig& cfg, LoadedData& data,
                             const std::vector<TrialSpec>& specs) {
    PrecomputedInputs pre;
    for (const auto& spec : specs) {
        if (spec.method == "dasga" || spec.method == "ssl") {
            const dasga::Graph& gt = ensure_graph(data.target, cfg.graph, spec.k);
            if (!dasga::is_connected(gt))
                throw dasga::config_error("target graph is disconnected (k=" +
                                          std::to_string(spec.k) + ")");
        }
        if (spec.method == "dasga") {
            const dasga::Graph& gs = ensure_graph(data.source, cfg.graph, spec.k);
            if (!dasga::is_connected(gs))
                throw dasga::config_error("source graph is disconnected (k=" +
                                          std::to_string(spec.k) + ")");
            const auto key = std::make_pair(spec.k, spec.params.R);
            if (!pre.bases.count(key)) {
                const dasga::Graph& gt = ensure_graph(data.target, cfg.graph, spec.k);
                pre.bases.emplace(
                    key, std::make_pair(
                             dasga::eigendecompose(dasga::laplacian(gs), spec.params.R),
                             dasga::eigendecompose(dasga::laplacian(gt), spec.params.R)));
            }
        }
        const auto skey = std::make_pair(spec.ratio, spec.seed);
        if (!pre.splits.count(skey)) {
            dasga::ExperimentSplit split_s =
                cfg.source_label_ratio >= 1.0
                    ? full_split(data.source.dataset.size(), 1.0)
                    : dasga::sample_split(data.source.dataset, cfg.source_label_ratio,
                                          mix_seed(spec.seed, 17));
            dasga::ExperimentSplit split_t =
                dasga::sample_split(data.target.dataset, spec.ratio, spec.seed);
            pre.splits.emplace(skey, std::make_pair(std::move(split_s), std::move(split_t)));
        }
    }
    return pre;
}

std::vector<TrialOutcome> execute(const ExperimentConfig& cfg, LoadedData& data,
                                  const std::vector<TrialSpec>& specs, int parallel) {
    PrecomputedInputs pre = precompute(cfg, data, specs);
    std::vector<TrialOutcome> outcomes(specs.size());
    parallel_for(static_cast<int>(specs.size()), parallel, [&](int i) {
        const TrialSpec& spec = specs[i];
        const auto& [split_s, split_t] = pre.splits.at({spec.ratio, spec.seed});
        const dasga::SpectralBasis* bs = nullptr;
        const dasga::SpectralBasis* bt = nullptr;
        if (spec.method == "dasga") {
            const auto& pair = pre.bases.at({spec.k, spec.params.R});
            bs = &pair.first;
            bt = &pair.second;
        }
        const dasga::Graph* gt = nullptr;
        if (spec.method == "ssl" || spec.method == "dasga") {
            gt = data.target.graph_from_file ? &*data.target.dataset.graph
                                             : &data.target.graph_by_k.at(spec.k);
        }
        outcomes[i] = run_trial(cfg, spec.method, data.source.dataset, data.target.dataset, bs, bt,
                                gt, split_s, split_t, spec.params, spec.seed);
    });
    return outcomes;
}

int report_failures(const std::vector<TrialSpec>& specs, const std::vector<TrialOutcome>& outcomes,
                    bool allow_failures) {
    int failures = 0;
    for (size_t i = 0; i < specs.size(); ++i) {
        if (!outcomes[i].ok) {
            ++failures;
            std::cerr << "trial failed: method=" << specs[i].method
                      << " ratio=" << fmt(specs[i].ratio) << " seed=" << specs[i].seed << ": "
                      << outcomes[i].error << "\n";
        }
    }
    if (failures > 0 && !allow_failures) return 1;
    return 0;
}

int cmd_run(const std::string& config_path, const std::string& out_dir, int seeds_override,
            int parallel, bool allow_failures) {
    ExperimentConfig cfg = parse_config(config_path);
    if (seeds_override > 0) cfg.seeds = seeds_override;
    validate_config(cfg, false);
    LoadedData data = load_data(cfg);
    fs::create_directories(out_dir);

    std::vector<TrialSpec> specs;
    for (const std::string& method : cfg.methods) {
        for (const double ratio : cfg.label_ratios) {
            for (int seed = 0; seed < cfg.seeds; ++seed) {
                specs.push_back({method, ratio, seed, cfg.align, cfg.graph.k});
            }
        }
    }
    const std::vector<TrialOutcome> outcomes = execute(cfg, data, specs, parallel);

    std::ofstream out(fs::path(out_dir) / "results.csv");
    out << "method,label_ratio,seed,misclassification,rms,runtime_ms,objective_final,outer_iters\n";
    for (size_t i = 0; i < specs.size(); ++i) {
        const TrialSpec& s = specs[i];
        const TrialOutcome& o = outcomes[i];
        out << s.method << ',' << fmt(s.ratio) << ',' << s.seed << ',' << fmt(o.misclassification)
            << ',' << fmt(o.rms) << ',' << fmt(o.runtime_ms) << ',' << fmt(o.objective_final)
            << ',' << o.outer_iters << '\n';
        if (cfg.histories && s.method == "dasga" && !o.history.empty()) {
            const std::string name =
                "history_" + s.method + "_r" + fmt(s.ratio) + "_s" + std::to_string(s.seed) + ".csv";
            dasga::write_history_csv((fs::path(out_dir) / name).string(), o.history);
        }
    }
    out.close();
    return report_failures(specs, outcomes, allow_failures);
}

double mean_error(const ExperimentConfig& cfg, const std::vector<TrialOutcome>& outcomes,
                  size_t begin, size_t count) {
    double acc = 0.0;
    long n = 0;
    for (size_t i = begin; i < begin + count; ++i) {
        if (!outcomes[i].ok) continue;
        acc += cfg.dataset.task == dasga::Task::Classification ? outcomes[i].misclassification
                                                               : outcomes[i].rms;
        ++n;
    }
    return n ? acc / static_cast<double>(n) : std::nan("");
}

int cmd_sweep(const std::string& config_path, const std::string& out_dir, int seeds_override,
              int parallel, bool allow_failures) {
    ExperimentConfig cfg = parse_config(config_path);
    if (seeds_override > 0) cfg.seeds = seeds_override;
    validate_config(cfg, true);
    LoadedData data = load_data(cfg);
    fs::create_directories(out_dir);
    const double ratio = cfg.label_ratios.front();

    int status = 0;

    if (!cfg.sweep_mu1.empty()) {
        std::vector<TrialSpec> specs;
        for (const double mu1 : cfg.sweep_mu1) {
            for (const double mu2 : cfg.sweep_mu2) {
                dasga::AlignmentParams p = cfg.align;
                p.mu1 = mu1;
                p.mu2 = mu2;
                for (int seed = 0; seed < cfg.seeds; ++seed)
                    specs.push_back({"dasga", ratio, seed, p, cfg.graph.k});
            }
        }
        const auto outcomes = execute(cfg, data, specs, parallel);
        std::ofstream out(fs::path(out_dir) / "sweep_mu.csv");
        out << "mu1/mu2";
        for (const double mu2 : cfg.sweep_mu2) out << ',' << fmt(mu2);
        out << '\n';
        size_t at = 0;
        for (const double mu1 : cfg.sweep_mu1) {
            out << fmt(mu1);
            for (size_t c = 0; c < cfg.sweep_mu2.size(); ++c) {
                out << ',' << fmt(mean_error(cfg, outcomes, at, cfg.seeds));
                at += cfg.seeds;
            }
            out << '\n';
        }
        status |= report_failures(specs, outcomes, allow_failures);
    }

    if (!cfg.sweep_k.empty()) {
        std::vector<TrialSpec> specs;
        for (const int k : cfg.sweep_k) {
            for (int seed = 0; seed < cfg.seeds; ++seed)
                specs.push_back({"dasga", ratio, seed, cfg.align, k});
        }
        const auto outcomes = execute(cfg, data, specs, parallel);
        std::ofstream out(fs::path(out_dir) / "sweep_k.csv");
        out << "k,mean_error\n";
        size_t at = 0;
        for (const int k : cfg.sweep_k) {
            out << k << ',' << fmt(mean_error(cfg, outcomes, at, cfg.seeds)) << '\n';
            at += cfg.seeds;
        }
        status |= report_failures(specs, outcomes, allow_failures);
    }

    if (!cfg.sweep_r.empty()) {
        std::vector<TrialSpec> specs;
        for (const int R : cfg.sweep_r) {
            dasga::AlignmentParams p = cfg.align;
            p.R = R;
            for (int seed = 0; seed < cfg.seeds; ++seed)
                specs.push_back({"dasga", ratio, seed, p, cfg.graph.k});
        }
        const auto outcomes = execute(cfg, data, specs, parallel);
        std::ofstream out(fs::path(out_dir) / "sweep_r.csv");
        out << "R,mean_error\n";
        size_t at = 0;
        for (const int R : cfg.sweep_r) {
            out << R << ',' << fmt(mean_error(cfg, outcomes, at, cfg.seeds)) << '\n';
            at += cfg.seeds;
        }
        status |= report_failures(specs, outcomes, allow_failures);
    }

    return status;
}

int cmd_spectra(const std::string& config_path, const std::string& out_dir) {
    ExperimentConfig cfg = parse_config(config_path);
    validate_config(cfg, false);
    LoadedData data = load_data(cfg);
    fs::create_directories(out_dir);

    auto emit = [&](DomainData& dom, const std::string& name) {
        const dasga::Graph& g = ensure_graph(dom, cfg.graph, cfg.graph.k);
        const int R = cfg.spectra_R > 0 ? std::min(cfg.spectra_R, g.n) : g.n;
        const dasga::SpectralBasis basis = dasga::eigendecompose(dasga::laplacian(g), R);

        Eigen::VectorXd signal = dom.dataset.labels;
        if (dom.dataset.task == dasga::Task::Classification) {
            const auto classes = distinct_values(dom.dataset.labels, dom.dataset.labels);
            if (classes.size() == 2) {
                for (Eigen::Index i = 0; i < signal.size(); ++i)
                    signal[i] = signal[i] == classes[1] ? 1.0 : -1.0;
            }
        }
        dasga::write_spectrum_csv((fs::path(out_dir) / ("spectra_" + name + ".csv")).string(),
                                  dasga::spectrum_report(basis, signal));
    };
    emit(data.source, "source");
    emit(data.target, "target");
    return 0;
}

int cmd_synth(const std::string& preset, std::uint64_t seed, int n_per_class,
              const std::string& out_dir) {
    auto [src, tgt] = dasga::synth_preset(preset, seed, n_per_class);
    fs::create_directories(out_dir);
    dasga::write_csv_features((fs::path(out_dir) / "source_features.csv").string(), *src.features);
    dasga::write_labels((fs::path(out_dir) / "source_labels.csv").string(), src.labels);
    dasga::write_csv_features((fs::path(out_dir) / "target_features.csv").string(), *tgt.features);
    dasga::write_labels((fs::path(out_dir) / "target_labels.csv").string(), tgt.labels);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"DASGA experiment harness: graph-spectral domain adaptation"};
    app.require_subcommand(1);

    std::string config_path, out_dir = "out";
    int seeds_override = 0, parallel = 1;
    bool allow_failures = false;

    auto add_common = [&](CLI::App* cmd, bool with_trials) {
        cmd->add_option("--config", config_path, "experiment config (JSON)")->required();
        cmd->add_option("--out", out_dir, "output directory");
        if (with_trials) {
            cmd->add_option("--seeds", seeds_override, "override experiment.seeds");
            cmd->add_option("--parallel", parallel, "worker threads for trials");
            cmd->add_flag("--allow-failures", allow_failures,
                          "exit 0 even when some trials fail");
        }
    };

    CLI::App* run_cmd = app.add_subcommand("run", "label-ratio experiment -> results.csv");
    add_common(run_cmd, true);
    CLI::App* sweep_cmd =
        app.add_subcommand("sweep", "parameter grids -> sweep_mu.csv / sweep_k.csv / sweep_r.csv");
    add_common(sweep_cmd, true);
    CLI::App* spectra_cmd =
        app.add_subcommand("spectra", "ground-truth label spectra -> spectra_{source,target}.csv");
    add_common(spectra_cmd, false);

    std::string preset;
    std::uint64_t synth_seed = 1;
    int n_per_class = 100;
    std::string synth_out = "out";
    CLI::App* synth_cmd = app.add_subcommand("synth", "write a synthetic dataset as CSV files");
    synth_cmd->add_option("preset", preset, "synth1 or synth2")->required();
    synth_cmd->add_option("--seed", synth_seed, "generator seed");
    synth_cmd->add_option("--n-per-class", n_per_class, "samples per class per domain");
    synth_cmd->add_option("--out", synth_out, "output directory")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (run_cmd->parsed())
            return cmd_run(config_path, out_dir, seeds_override, parallel, allow_failures);
        if (sweep_cmd->parsed())
            return cmd_sweep(config_path, out_dir, seeds_override, parallel, allow_failures);
        if (spectra_cmd->parsed()) return cmd_spectra(config_path, out_dir);
        if (synth_cmd->parsed()) return cmd_synth(preset, synth_seed, n_per_class, synth_out);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
