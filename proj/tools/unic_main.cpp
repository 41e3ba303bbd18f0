// Command-line surface for the neighbor-mining clustering pipeline:
//   gen     synthesize a Gaussian-mixture benchmark (+ GCD split)
//   mine    build the cleaned neighbor index from embeddings
//   train   fit the clustering head on sampled neighbor triples
//   eval    score a trained head (clustering or GCD protocol)
//   kmeans  k-means baseline with the same metrics
//   stats   neighbor-cleaning diagnostics as CSV
// Config files are flat `key = value` text; command-line flags override
// file values, and the fully resolved config is echoed into --out.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "unic/cluster_head.hpp"
#include "unic/embedding.hpp"
#include "unic/kernels.hpp"
#include "unic/kmeans.hpp"
#include "unic/knn.hpp"
#include "unic/metrics.hpp"
#include "unic/neighbor_graph.hpp"
#include "unic/trainer.hpp"

namespace fs = std::filesystem;

namespace {

struct CommonOpts {
    std::string out = ".";
    std::uint64_t seed = 0;
    unsigned threads = 0;
    std::string config;
};

void add_common(CLI::App* sub, CommonOpts& c) {
    sub->add_option("--out", c.out, "Output directory")->capture_default_str();
    sub->add_option("--seed", c.seed, "RNG seed")->capture_default_str();
    sub->add_option("--threads", c.threads, "Worker cap (0 = hardware)")->capture_default_str();
    sub->add_option("--config", c.config, "Flat key = value config file");
}

// Expands `--config FILE` into synthetic argv tokens placed before the
// real flags, so later command-line values win (all options take-last).
std::vector<std::string> expand_config(int argc, char** argv) {
    std::vector<std::string> args(argv, argv + argc);
    std::string config_path;
    for (std::size_t i = 1; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) {
            config_path = args[i + 1];
        } else if (args[i].rfind("--config=", 0) == 0) {
            config_path = args[i].substr(9);
        }
    }
    if (config_path.empty() || args.size() < 2) return args;

    std::ifstream is(config_path);
    if (!is) throw std::runtime_error("cannot open config: " + config_path);
    std::vector<std::string> tokens;
    std::string line;
    while (std::getline(is, line)) {
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        auto eq = line.find('=');
        if (eq == std::string::npos) {
            if (line.find_first_not_of(" \t\r") != std::string::npos) {
                throw std::runtime_error("bad config line (want key = value): " + line);
            }
            continue;
        }
        auto trim = [](std::string s) {
            auto b = s.find_first_not_of(" \t\r");
            auto e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (value.size() >= 2 && (value.front() == '"' || value.front() == '\'') &&
            value.back() == value.front()) {
            value = value.substr(1, value.size() - 2);
        }
        if (key.empty()) throw std::runtime_error("bad config line (empty key): " + line);
        if (value.empty()) continue;  // empty means default
        tokens.push_back("--" + key + "=" + value);
    }
    std::vector<std::string> merged;
    merged.push_back(args[0]);
    merged.push_back(args[1]);  // subcommand first
    merged.insert(merged.end(), tokens.begin(), tokens.end());
    merged.insert(merged.end(), args.begin() + 2, args.end());
    return merged;
}

void take_last_everywhere(CLI::App* app) {
    for (auto* opt : app->get_options()) {
        if (opt->get_expected_min() > 0 || opt->get_items_expected_max() > 0) {
            opt->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
        }
    }
    for (auto* sub : app->get_subcommands({})) take_last_everywhere(sub);
}

// Flat key = value echo of every option's final value, reloadable via
// --config.
void echo_config(CLI::App* sub, const CommonOpts& c) {
    fs::create_directories(c.out);
    std::ofstream os(fs::path(c.out) / ("resolved_" + sub->get_name() + ".config"));
    for (const CLI::Option* opt : sub->get_options()) {
        if (opt->get_lnames().empty()) continue;
        std::string name = opt->get_lnames()[0];
        if (name == "help" || name == "config") continue;
        std::string value;
        if (opt->count() > 0) {
            const auto& results = opt->results();
            value = results.empty() ? "true" : results.back();
        } else {
            value = opt->get_default_str();
            if (value.empty() && opt->get_expected_min() == 0) value = "false";
        }
        if (value.empty()) continue;  // unset path-style option
        os << name << " = " << value << "\n";
    }
}

unic::EmbeddingSet load_set(const std::string& path, bool csv, bool csv_labels) {
    if (csv || csv_labels) return unic::read_embeddings_csv(path, csv_labels);
    return unic::read_embeddings(path);
}

std::string path_under(const std::string& out, const std::string& name,
                       const std::string& explicit_path) {
    if (!explicit_path.empty()) return explicit_path;
    fs::create_directories(out);
    return (fs::path(out) / name).string();
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open for writing: " + path);
    os << text;
    if (!os) throw std::runtime_error("I/O failure while writing " + path);
}

unic::PositiveSource pos_source(const std::string& s) {
    if (s == "labeled") return unic::PositiveSource::labeled;
    if (s == "mined") return unic::PositiveSource::mined;
    return unic::PositiveSource::cleaned;
}

unic::NegativeSource neg_source(const std::string& s) {
    if (s == "labeled") return unic::NegativeSource::labeled;
    if (s == "random") return unic::NegativeSource::random_any;
    return unic::NegativeSource::mined;
}

const CLI::Validator kModeNames = CLI::IsMember({"cluster", "gcd"});
const CLI::Validator kHeadNames = CLI::IsMember({"mlp", "fc", "linear"});
const CLI::Validator kPosNames = CLI::IsMember({"labeled", "mined", "cleaned"});
const CLI::Validator kNegNames = CLI::IsMember({"labeled", "mined", "random"});

int run(int argc, char** argv) {
    CLI::App app{"Neighbor-mining clustering and category discovery pipeline"};
    app.require_subcommand(1);

    // ---- gen ----
    auto* gen = app.add_subcommand("gen", "Generate a synthetic Gaussian-mixture benchmark");
    CommonOpts gen_c;
    struct {
        std::uint32_t n = 2000, dim = 32, classes = 10, tau1 = 10;
        double sep = 6.0, labeled_frac = 0.0, old_frac = 0.0;
        std::string emb_out, split_out;
    } g;
    gen->add_option("--n", g.n, "Sample count")->check(CLI::Range(1u, 100000000u))
        ->capture_default_str();
    gen->add_option("--dim", g.dim, "Embedding dimension")->check(CLI::Range(1u, 1000000u))
        ->capture_default_str();
    gen->add_option("--classes", g.classes, "Mixture components")
        ->check(CLI::Range(1u, 1000000u))->capture_default_str();
    gen->add_option("--sep", g.sep, "Min distance between component means (unit stds)")
        ->capture_default_str();
    gen->add_option("--labeled-frac", g.labeled_frac, "Labeled fraction of each Old class")
        ->check(CLI::Range(0.0, 1.0))->capture_default_str();
    gen->add_option("--old-frac", g.old_frac, "Fraction of classes marked Old")
        ->check(CLI::Range(0.0, 1.0))->capture_default_str();
    gen->add_option("--tau1", g.tau1, "Neighbor count for the purity summary")
        ->capture_default_str();
    gen->add_option("--emb-out", g.emb_out, "Embedding file path (default <out>/embeddings.emb)");
    gen->add_option("--split-out", g.split_out, "Split file path (default <out>/split.json)");
    add_common(gen, gen_c);

    // ---- mine ----
    auto* mine = app.add_subcommand("mine", "Mine and clean neighbors into an index file");
    CommonOpts mine_c;
    struct {
        std::string emb, index_out;
        bool csv = false, csv_labels = false;
        std::uint32_t tau1 = 10, tau2 = 0, eta = 70;
    } mi;
    mine->add_option("--emb", mi.emb, "Embedding file")->required();
    mine->add_flag("--csv", mi.csv, "Treat --emb as CSV");
    mine->add_flag("--csv-labels", mi.csv_labels, "CSV has a trailing label column");
    mine->add_option("--tau1", mi.tau1, "Positive neighbors per anchor")->capture_default_str();
    mine->add_option("--tau2", mi.tau2, "Negative rank cutoff (0 = n/2)")->capture_default_str();
    mine->add_option("--eta", mi.eta, "Second-order union threshold")->capture_default_str();
    mine->add_option("--index-out", mi.index_out,
                     "Index file path (default <out>/neighbors.nbr)");
    add_common(mine, mine_c);

    // ---- train ----
    auto* train = app.add_subcommand("train", "Train the clustering head");
    CommonOpts train_c;
    struct {
        std::string emb, index, split, model_out, history_out;
        std::string mode = "cluster", head = "mlp";
        std::string pos_labeled = "labeled", pos_unlabeled = "cleaned";
        std::string neg_labeled = "mined", neg_unlabeled = "mined";
        bool csv = false, csv_labels = false, track_metrics = false;
        unic::TrainConfig cfg;
    } tr;
    train->add_option("--emb", tr.emb, "Embedding file")->required();
    train->add_option("--index", tr.index, "Neighbor index file")->required();
    train->add_flag("--csv", tr.csv, "Treat --emb as CSV");
    train->add_flag("--csv-labels", tr.csv_labels, "CSV has a trailing label column");
    train->add_option("--mode", tr.mode, "cluster or gcd")->check(kModeNames)
        ->capture_default_str();
    train->add_option("--split", tr.split, "Split file (required for gcd)");
    train->add_option("--k", tr.cfg.k, "Cluster count")->required();
    train->add_option("--epochs", tr.cfg.epochs, "Training epochs")->capture_default_str();
    train->add_option("--batch", tr.cfg.batch_size, "Batch size")->capture_default_str();
    train->add_option("--lr", tr.cfg.lr0, "Initial learning rate")->capture_default_str();
    train->add_option("--lambda-pos", tr.cfg.weights.lambda_pos, "Positive loss weight")
        ->capture_default_str();
    train->add_option("--lambda-neg", tr.cfg.weights.lambda_neg, "Negative loss weight")
        ->capture_default_str();
    train->add_option("--lambda-ent", tr.cfg.weights.lambda_ent, "Entropy loss weight")
        ->capture_default_str();
    train->add_option("--head", tr.head, "mlp or fc")->check(kHeadNames)
        ->capture_default_str();
    train->add_option("--hidden", tr.cfg.hidden, "MLP hidden width")->capture_default_str();
    train->add_option("--n-pos", tr.cfg.n_pos, "Positive draws per anchor per step")
        ->capture_default_str();
    train->add_option("--n-neg", tr.cfg.n_neg, "Negative draws per anchor per step")
        ->capture_default_str();
    train->add_option("--alpha", tr.cfg.supervision.labeled_negative_fraction,
                      "Labeled-negative mixing fraction")->check(CLI::Range(0.0, 1.0))
        ->capture_default_str();
    train->add_option("--pos-labeled", tr.pos_labeled, "Positive source for labeled anchors")
        ->check(kPosNames)->capture_default_str();
    train->add_option("--pos-unlabeled", tr.pos_unlabeled,
                      "Positive source for unlabeled anchors")
        ->check(kPosNames)->capture_default_str();
    train->add_option("--neg-labeled", tr.neg_labeled, "Negative source for labeled anchors")
        ->check(kNegNames)->capture_default_str();
    train->add_option("--neg-unlabeled", tr.neg_unlabeled,
                      "Negative source for unlabeled anchors")
        ->check(kNegNames)->capture_default_str();
    train->add_flag("--track-metrics", tr.track_metrics, "Record per-epoch metrics");
    train->add_option("--model-out", tr.model_out, "Model path (default <out>/model.head)");
    train->add_option("--history-out", tr.history_out,
                      "History CSV path (default <out>/history.csv)");
    add_common(train, train_c);

    // ---- eval ----
    auto* eval = app.add_subcommand("eval", "Evaluate a trained head");
    CommonOpts eval_c;
    struct {
        std::string emb, model, split, report_out;
        std::string protocol = "cluster";
        bool csv = false, csv_labels = false;
    } ev;
    eval->add_option("--emb", ev.emb, "Embedding file (labels required)")->required();
    eval->add_option("--model", ev.model, "UNICHEAD model file")->required();
    eval->add_flag("--csv", ev.csv, "Treat --emb as CSV");
    eval->add_flag("--csv-labels", ev.csv_labels, "CSV has a trailing label column");
    eval->add_option("--protocol", ev.protocol, "cluster or gcd")->check(kModeNames)
        ->capture_default_str();
    eval->add_option("--split", ev.split, "Split file (required for gcd)");
    eval->add_option("--report-out", ev.report_out,
                     "Metrics JSON path (default <out>/metrics.json)");
    add_common(eval, eval_c);

    // ---- kmeans ----
    auto* km = app.add_subcommand("kmeans", "k-means baseline with metrics");
    CommonOpts km_c;
    struct {
        std::string emb, report_out, assignments_out;
        bool csv = false, csv_labels = false;
        std::uint32_t k = 0, restarts = 10, max_iter = 300;
        double tol = 1e-6;
    } kp;
    km->add_option("--emb", kp.emb, "Embedding file")->required();
    km->add_flag("--csv", kp.csv, "Treat --emb as CSV");
    km->add_flag("--csv-labels", kp.csv_labels, "CSV has a trailing label column");
    km->add_option("--k", kp.k, "Cluster count")->required();
    km->add_option("--restarts", kp.restarts, "k-means++ restarts")->capture_default_str();
    km->add_option("--max-iter", kp.max_iter, "Lloyd iteration cap")->capture_default_str();
    km->add_option("--tol", kp.tol, "Centroid shift tolerance")->capture_default_str();
    km->add_option("--report-out", kp.report_out,
                   "Metrics JSON path (default <out>/kmeans_metrics.json)");
    km->add_option("--assignments-out", kp.assignments_out, "Write assignments as a labels CSV");
    add_common(km, km_c);

    // ---- stats ----
    auto* stats = app.add_subcommand("stats", "Neighbor-cleaning diagnostics CSV");
    CommonOpts stats_c;
    struct {
        std::string emb, index, stats_out, hist_out;
        bool csv = false, csv_labels = false;
        std::size_t points = 10;
        std::vector<std::uint32_t> etas;
    } st;
    stats->add_option("--emb", st.emb, "Embedding file (labels required)")->required();
    stats->add_option("--index", st.index, "Neighbor index file")->required();
    stats->add_flag("--csv", st.csv, "Treat --emb as CSV");
    stats->add_flag("--csv-labels", st.csv_labels, "CSV has a trailing label column");
    stats->add_option("--points", st.points, "Sweep points when --etas unset")
        ->capture_default_str();
    stats->add_option("--etas", st.etas, "Explicit eta sweep values")->delimiter(',');
    stats->add_option("--stats-out", st.stats_out,
                      "CSV path (default <out>/neighbor_stats.csv)");
    stats->add_option("--hist-out", st.hist_out, "Optional union-size histogram CSV");
    add_common(stats, stats_c);

    take_last_everywhere(&app);

    std::vector<std::string> merged = expand_config(argc, argv);
    std::vector<const char*> cargs;
    cargs.reserve(merged.size());
    for (const auto& s : merged) cargs.push_back(s.c_str());
    try {
        app.parse(static_cast<int>(cargs.size()), cargs.data());
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    if (gen->parsed()) {
        echo_config(gen, gen_c);
        unic::MixtureParams params;
        params.n = g.n;
        params.dim = g.dim;
        params.k = g.classes;
        params.separation = g.sep;
        params.seed = gen_c.seed;
        params.labeled_fraction = g.labeled_frac;
        params.old_class_fraction = g.old_frac;
        auto [set, split] = unic::generate_gaussian_mixture(params);
        std::string emb_path = path_under(gen_c.out, "embeddings.emb", g.emb_out);
        std::string split_path = path_under(gen_c.out, "split.json", g.split_out);
        unic::write_embeddings(set, emb_path);
        unic::write_split(split, split_path);
        std::cout << "wrote " << emb_path << " (n=" << set.n << ", dim=" << set.dim
                  << ", k=" << params.k << ")\n";
        std::cout << "wrote " << split_path << " (old classes=" << split.old_classes.size()
                  << ", labeled=" << split.labeled_count() << ")\n";
        if (set.n >= 2) {
            std::uint32_t tau1 = std::min(g.tau1, set.n - 1);
            auto mined = unic::compute_neighborhoods(set, tau1, tau1 + 1, gen_c.threads);
            std::cout << "purity@tau1=" << tau1 << ": " << unic::positive_purity(mined, set)
                      << "\n";
        }
        return 0;
    }

    if (mine->parsed()) {
        echo_config(mine, mine_c);
        unic::EmbeddingSet set = load_set(mi.emb, mi.csv, mi.csv_labels);
        std::uint32_t tau2 = mi.tau2 == 0 ? set.n / 2 : mi.tau2;
        if (!(0 < mi.tau1 && mi.tau1 < tau2 && tau2 <= set.n)) {
            throw std::runtime_error("tau1 < tau2 <= n required");
        }
        auto mined = unic::compute_neighborhoods(set, mi.tau1, tau2, mine_c.threads);
        unic::NeighborIndex index = unic::clean(mined, mi.eta);
        std::string index_path = path_under(mine_c.out, "neighbors.nbr", mi.index_out);
        unic::write_index(index, index_path);
        std::cout << "wrote " << index_path << " (tau1=" << mi.tau1 << ", tau2=" << tau2
                  << ", eta=" << mi.eta << ")\n";
        std::cout << "removed_fraction=" << index.removed_fraction() << "\n";
        if (set.has_labels()) {
            unic::NeighborStats s = unic::neighbor_stats(index, set, {mi.eta});
            std::cout << "retained_purity=" << s.rows[0].retained_purity
                      << " removed_purity=" << s.rows[0].removed_purity << "\n";
        }
        return 0;
    }

    if (train->parsed()) {
        echo_config(train, train_c);
        unic::EmbeddingSet set = load_set(tr.emb, tr.csv, tr.csv_labels);
        unic::NeighborIndex index = unic::read_index(tr.index, set.n);
        tr.cfg.seed = train_c.seed;
        tr.cfg.track_metrics = tr.track_metrics;
        tr.cfg.head_kind = tr.head == "mlp" ? unic::HeadKind::mlp : unic::HeadKind::linear;
        tr.cfg.supervision.mode = tr.mode == "gcd" ? unic::Mode::gcd : unic::Mode::cluster;
        tr.cfg.supervision.positive_source_labeled = pos_source(tr.pos_labeled);
        tr.cfg.supervision.positive_source_unlabeled = pos_source(tr.pos_unlabeled);
        tr.cfg.supervision.negative_source_labeled = neg_source(tr.neg_labeled);
        tr.cfg.supervision.negative_source_unlabeled = neg_source(tr.neg_unlabeled);
        std::optional<unic::SplitSpec> split;
        if (tr.cfg.supervision.mode == unic::Mode::gcd) {
            if (tr.split.empty()) {
                throw CLI::ValidationError("--split", "gcd mode requires --split");
            }
            split = unic::read_split(tr.split, set.n);
        }
        auto [params, history] =
            unic::train(set, index, split ? &*split : nullptr, tr.cfg);
        std::string model_path = path_under(train_c.out, "model.head", tr.model_out);
        std::string history_path = path_under(train_c.out, "history.csv", tr.history_out);
        unic::save_head(params, model_path);
        write_text(history_path, history.to_csv());
        std::cout << "wrote " << model_path << "\n";
        std::cout << "wrote " << history_path << "\n";

        std::vector<std::int32_t> pred = unic::predict(params, set);
        double conc = unic::argmax_concentration(pred);
        if (conc > 0.9) {
            std::cout << "warning: collapse suspected, argmax concentration = " << conc << "\n";
        }
        if (set.has_labels()) {
            bool ids_ok = true;
            for (auto l : set.labels) {
                if (l < 0 || static_cast<std::uint32_t>(l) >= tr.cfg.k) ids_ok = false;
            }
            if (ids_ok) {
                unic::MetricsReport rep =
                    tr.cfg.supervision.mode == unic::Mode::gcd
                        ? unic::gcd_report(pred, set.labels, *split, tr.cfg.k)
                        : unic::cluster_report(pred, set.labels, tr.cfg.k);
                std::cout << rep.to_json() << "\n";
            }
        }
        return 0;
    }

    if (eval->parsed()) {
        echo_config(eval, eval_c);
        unic::EmbeddingSet set = load_set(ev.emb, ev.csv, ev.csv_labels);
        if (!set.has_labels()) throw std::runtime_error("missing labels");
        unic::HeadParams params = unic::load_head(ev.model);
        std::vector<std::int32_t> pred = unic::predict(params, set);
        unic::MetricsReport rep;
        if (ev.protocol == "gcd") {
            if (ev.split.empty()) {
                throw CLI::ValidationError("--split", "gcd protocol requires --split");
            }
            unic::SplitSpec split = unic::read_split(ev.split, set.n);
            rep = unic::gcd_report(pred, set.labels, split, params.k);
        } else {
            rep = unic::cluster_report(pred, set.labels, params.k);
        }
        std::string report_path = path_under(eval_c.out, "metrics.json", ev.report_out);
        write_text(report_path, rep.to_json() + "\n");
        std::cout << rep.to_json() << "\n";
        return 0;
    }

    if (km->parsed()) {
        echo_config(km, km_c);
        unic::EmbeddingSet set = load_set(kp.emb, kp.csv, kp.csv_labels);
        unic::KMeansResult result = unic::kmeans(set, kp.k, km_c.seed, kp.restarts, kp.max_iter,
                                                 kp.tol, km_c.threads);
        if (!kp.assignments_out.empty()) {
            std::string csv;
            for (auto a : result.assignments) csv += std::to_string(a) + "\n";
            write_text(kp.assignments_out, csv);
            std::cout << "wrote " << kp.assignments_out << "\n";
        }
        std::cout << "inertia=" << result.inertia << " iterations=" << result.iterations << "\n";
        if (set.has_labels()) {
            unic::MetricsReport rep = unic::cluster_report(result.assignments, set.labels, kp.k);
            std::string report_path = path_under(km_c.out, "kmeans_metrics.json", kp.report_out);
            write_text(report_path, rep.to_json() + "\n");
            std::cout << rep.to_json() << "\n";
        } else if (kp.assignments_out.empty()) {
            throw std::runtime_error("missing labels (use --assignments-out to skip metrics)");
        }
        return 0;
    }

    if (stats->parsed()) {
        echo_config(stats, stats_c);
        unic::EmbeddingSet set = load_set(st.emb, st.csv, st.csv_labels);
        unic::NeighborIndex index = unic::read_index(st.index, set.n);
        unic::NeighborStats s = unic::neighbor_stats(index, set, st.etas, st.points);
        std::string csv_path = path_under(stats_c.out, "neighbor_stats.csv", st.stats_out);
        write_text(csv_path, s.to_csv());
        std::cout << s.to_csv();
        if (!st.hist_out.empty()) {
            std::string csv = "union_size,count\n";
            for (const auto& [size, count] : s.union_histogram) {
                csv += std::to_string(size) + "," + std::to_string(count) + "\n";
            }
            write_text(st.hist_out, csv);
        }
        return 0;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
