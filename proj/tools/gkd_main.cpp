// Copyright (c) 2026, The gkd Authors
// SPDX-License-Identifier: Apache-2.0
//
// gkd: command-line entry point for the knowledge-distillation pipeline.

#include "gkd/binary_io.h"
#include "gkd/checkpoint.h"
#include "gkd/datagen.h"
#include "gkd/dataset.h"
#include "gkd/distill.h"
#include "gkd/embedding.h"
#include "gkd/errors.h"
#include "gkd/eval.h"
#include "gkd/fixtures.h"
#include "gkd/graph.h"
#include "gkd/teacher.h"

#include "CLI11.hpp"
#include "json.hpp"

#include <filesystem>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using nlohmann::json;

namespace gkd {
namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNumeric = 3;

/// Thrown for flag combinations CLI11 cannot express.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string resolved(const std::string& path) { return fs::absolute(path).lexically_normal().string(); }

json resolved_list(const std::vector<std::string>& paths) {
    json out = json::array();
    for (const auto& p : paths) out.push_back(resolved(p));
    return out;
}

json echo(const std::string& command, json flags) { return {{"command", command}, {"flags", std::move(flags)}}; }

void write_json(const fs::path& path, const json& j) { write_file(path, j.dump(2) + "\n"); }

OptimizerConfig optimizer_config(const std::string& name, std::optional<double> lr) {
    OptimizerConfig c;
    c.kind = parse_optimizer_kind(name);
    c.learning_rate = lr ? *lr : default_learning_rate(c.kind);
    return c;
}

std::vector<std::string> as_list(const std::vector<std::string>& raw) {
    std::vector<std::string> out;
    for (const auto& item : raw)
        if (!item.empty()) out.push_back(item);
    return out;
}

// gen-synth

struct GenSynthArgs {
    std::string out;
    SynthConfig config;
};

int run_gen_synth(const GenSynthArgs& a) {
    const SynthDataset data = generate_synthetic(a.config);
    write_synthetic(data, a.out);
    std::cout << "wrote " << data.dataset.records.size() << " samples to " << a.out << "\n";
    return 0;
}

// embed

struct EmbedArgs {
    std::string manifest, out;
    std::size_t dim = 64;
    std::uint64_t seed = 0;
};

int run_embed(const EmbedArgs& a) {
    const Dataset dataset = read_manifest(a.manifest);
    const EmbeddingStore store = embed_manifest(dataset, a.dim, a.seed);
    write_embedding_store(store, a.out);
    write_json(a.out + ".json",
               echo("embed", {{"manifest", resolved(a.manifest)}, {"out", resolved(a.out)}, {"dim", a.dim}, {"seed", a.seed}}));
    std::cout << "embedded " << store.size() << " vectors\n";
    return 0;
}

// build-graphs

struct BuildGraphsArgs {
    std::string manifest, triplets, triplet_embeddings, out;
    std::vector<std::string> embeddings;
    std::size_t k = 3;
    std::string edge_mode = "hybrid";
    double tau = 0.0;
    std::size_t threads = 1;
};

EmbeddingStore merged_store(const std::vector<std::string>& paths) {
    std::optional<EmbeddingStore> merged;
    for (const auto& p : paths) {
        EmbeddingStore s = read_embedding_store(p);
        if (!merged) {
            merged = std::move(s);
            continue;
        }
        if (s.dim() != merged->dim()) throw InputError("embedding store '" + p + "' has a different dimension");
        for (std::size_t i = 0; i < s.size(); ++i) {
            auto v = s.vector(i);
            merged->add(s.id(i), Vector(v.begin(), v.end()));
        }
    }
    return std::move(*merged);
}

int run_build_graphs(const BuildGraphsArgs& a) {
    const auto embedding_paths = as_list(a.embeddings);
    if (embedding_paths.empty()) throw UsageError("--embeddings needs at least one file");
    const EmbeddingStore content = merged_store(embedding_paths);
    const Dataset dataset = ingest_manifest(a.manifest, &content);
    const TripletStore triplets(read_triplets_tsv(a.triplets), read_embedding_store(a.triplet_embeddings));

    GraphConfig config;
    config.k = a.k;
    config.edges.mode = parse_edge_mode(a.edge_mode);
    config.edges.tau = a.tau;
    config.threads = a.threads;
    GraphSet set = build_graphs(dataset, content, triplets, config);
    set.config["run"] = echo("build-graphs", {{"manifest", resolved(a.manifest)},
                                              {"embeddings", resolved_list(embedding_paths)},
                                              {"triplets", resolved(a.triplets)},
                                              {"triplet_embeddings", resolved(a.triplet_embeddings)},
                                              {"k", a.k},
                                              {"edge_mode", a.edge_mode},
                                              {"tau", a.tau},
                                              {"threads", a.threads},
                                              {"out", resolved(a.out)}});
    write_graphs(set, a.out);
    std::cout << "built " << set.graphs.size() << " subgraphs\n";
    return 0;
}

// train-teacher

struct TrainTeacherArgs {
    std::string graphs, out, optimizer = "adam";
    std::size_t hidden = 64, head_hidden = 64, epochs = 30;
    std::optional<double> lr;
    std::uint64_t seed = 0;
};

int run_train_teacher(const TrainTeacherArgs& a) {
    const GraphSet set = read_graphs(a.graphs);
    TeacherConfig config;
    config.hidden = a.hidden;
    config.head_hidden = a.head_hidden;
    config.epochs = a.epochs;
    config.optimizer = optimizer_config(a.optimizer, a.lr);
    config.seed = a.seed;

    const auto train = filter_split(set.graphs, Split::train);
    const auto val = filter_split(set.graphs, Split::val);
    TeacherRun run = train_teacher(train, val, set.labels.size(), config);
    run.model.graph_config = set.config;
    Checkpoint cp = to_checkpoint(run.model, run.history);
    cp.metadata["run"] = echo("train-teacher", {{"graphs", resolved(a.graphs)},
                                                {"hidden", a.hidden},
                                                {"head_hidden", a.head_hidden},
                                                {"epochs", a.epochs},
                                                {"optimizer", a.optimizer},
                                                {"lr", config.optimizer.learning_rate},
                                                {"seed", a.seed},
                                                {"out", resolved(a.out)}});
    write_checkpoint(cp, a.out);
    for (const auto& m : run.history) {
        std::cout << "epoch " << m.epoch << " train_loss " << m.train_loss;
        if (m.val_micro_f1) std::cout << " val_micro_f1 " << *m.val_micro_f1;
        std::cout << "\n";
    }
    return 0;
}

// distill

struct DistillArgs {
    std::string graphs, out, student = "mlp", optimizer = "adam", soft_labels;
    std::vector<std::string> teachers;
    std::size_t hidden = 64, epochs = 30, threads = 1;
    double kd_weight = 1.0, temperature = 1.0;
    std::optional<double> lr;
    std::uint64_t seed = 0;
};

int run_distill(const DistillArgs& a) {
    const GraphSet set = read_graphs(a.graphs);
    const auto teacher_paths = as_list(a.teachers);
    if (a.kd_weight > 0.0 && teacher_paths.empty()) throw UsageError("--teacher is required when --kd-weight > 0");
    if (!a.soft_labels.empty() && teacher_paths.empty()) throw UsageError("--soft-labels needs --teacher");
    std::vector<TeacherModel> teachers;
    for (const auto& p : teacher_paths) teachers.push_back(teacher_from_checkpoint(read_checkpoint(p)));

    DistillConfig config;
    config.kind = parse_student_kind(a.student);
    config.hidden = a.hidden;
    config.kd_weight = a.kd_weight;
    config.temperature = a.temperature;
    config.epochs = a.epochs;
    config.optimizer = optimizer_config(a.optimizer, a.lr);
    config.seed = a.seed;
    config.threads = a.threads;

    const auto train = filter_split(set.graphs, Split::train);
    const auto val = filter_split(set.graphs, Split::val);
    const StudentRun run = teachers.empty() ? train_supervised(train, val, set.labels.size(), config)
                                            : train_student(train, val, teachers, config);
    const json run_echo = echo("distill", {{"graphs", resolved(a.graphs)},
                                           {"teacher", resolved_list(teacher_paths)},
                                           {"student", a.student},
                                           {"hidden", a.hidden},
                                           {"kd_weight", a.kd_weight},
                                           {"temperature", a.temperature},
                                           {"epochs", a.epochs},
                                           {"optimizer", a.optimizer},
                                           {"lr", config.optimizer.learning_rate},
                                           {"seed", a.seed},
                                           {"threads", a.threads},
                                           {"soft_labels", a.soft_labels.empty() ? json(nullptr) : json(resolved(a.soft_labels))},
                                           {"out", resolved(a.out)}});
    Checkpoint cp = to_checkpoint(run.model, run.history);
    cp.metadata["graph_config"] = set.config;
    cp.metadata["run"] = run_echo;
    write_checkpoint(cp, a.out);
    if (!a.soft_labels.empty()) {
        write_soft_labels(build_soft_label_cache(teachers, train, a.temperature, a.threads), a.soft_labels);
        write_json(a.soft_labels + ".json", run_echo);
    }
    for (const auto& m : run.history) {
        std::cout << "epoch " << m.epoch << " train_loss " << m.train_loss;
        if (m.val_micro_f1) std::cout << " val_micro_f1 " << *m.val_micro_f1;
        std::cout << "\n";
    }
    return 0;
}

// eval

struct EvalArgs {
    std::string model, graphs, split = "test", report;
    std::size_t threads = 1;
};

int run_eval(const EvalArgs& a) {
    const AnyModel model = load_model(a.model);
    const GraphSet set = read_graphs(a.graphs);
    const std::optional<Split> split = a.split == "all" ? std::nullopt : std::optional<Split>(parse_split(a.split));
    const EvalReport report = evaluate_model(model, set.graphs, split, set.labels, a.threads);
    json j = to_json(report);
    j["run"] = echo("eval", {{"model", resolved(a.model)},
                             {"graphs", resolved(a.graphs)},
                             {"split", a.split},
                             {"threads", a.threads},
                             {"report", resolved(a.report)}});
    write_json(a.report, j);
    std::cout << report.model_name << " " << report.split << " micro_f1 " << std::setprecision(6) << report.micro_f1
              << " samples " << report.samples << "\n";
    return 0;
}

// compare

struct CompareArgs {
    std::vector<std::string> baseline, treated;
    std::string out, table;
};

int run_compare(const CompareArgs& a) {
    const auto baselines = as_list(a.baseline), treated = as_list(a.treated);
    if (baselines.empty() || baselines.size() != treated.size())
        throw UsageError("--baseline and --treated must list the same, non-zero number of reports");

    std::vector<ComparisonRun> runs;
    std::map<std::string, std::string> name_of_path;
    std::map<std::string, int> name_uses;
    auto add = [&](const std::string& path, std::optional<std::string> baseline) -> std::string {
        const std::string key = resolved(path);
        if (!baseline) {
            if (auto it = name_of_path.find(key); it != name_of_path.end()) return it->second;
        }
        ComparisonRun run;
        run.report = read_report(path);
        const int uses = ++name_uses[run.report.model_name];
        run.name = uses == 1 ? run.report.model_name : run.report.model_name + "#" + std::to_string(uses);
        run.baseline = std::move(baseline);
        if (!run.baseline) name_of_path[key] = run.name;
        runs.push_back(std::move(run));
        return runs.back().name;
    };
    for (std::size_t i = 0; i < baselines.size(); ++i) {
        const std::string base = add(baselines[i], std::nullopt);
        add(treated[i], base);
    }

    const ComparisonReport report = comparison_report(runs);
    json j = to_json(report);
    j["run"] = echo("compare", {{"baseline", resolved_list(baselines)},
                                {"treated", resolved_list(treated)},
                                {"out", resolved(a.out)},
                                {"table", a.table.empty() ? json(nullptr) : json(resolved(a.table))}});
    write_json(a.out, j);
    const std::string table = render_table(report);
    if (a.table.empty()) {
        std::cout << table;
    } else {
        write_file(a.table, table);
    }
    return 0;
}

// gradcheck

struct GradcheckArgs {
    std::uint64_t seed = 0;
    double eps = 1e-5;
    double tolerance = 1e-4;
};

int run_gradcheck(const GradcheckArgs& a) {
    bool ok = true;
    for (const auto& r : model_gradchecks(a.seed, a.eps)) {
        const bool pass = r.max_rel_error <= a.tolerance;
        ok = ok && pass;
        std::cout << r.name << " max_rel_error " << std::scientific << std::setprecision(3) << r.max_rel_error
                  << (pass ? " ok" : " FAIL") << "\n";
    }
    return ok ? 0 : kExitNumeric;
}

int classify(const std::exception& e) {
    if (dynamic_cast<const NumericError*>(&e) || dynamic_cast<const InvariantError*>(&e) ||
        dynamic_cast<const DeterminismError*>(&e)) {
        return kExitNumeric;
    }
    return kExitData;
}

int main_impl(int argc, char** argv) {
    CLI::App app{"Graph-based commonsense knowledge distillation toolkit", "gkd"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all", "Show help for every subcommand");
    std::function<int()> action;

    GenSynthArgs gen;
    {
        auto* sub = app.add_subcommand("gen-synth", "Generate a synthetic multimodal dataset");
        sub->add_option("--out", gen.out, "Output directory")->required();
        sub->add_option("--samples", gen.config.samples, "Sample count")->capture_default_str();
        sub->add_option("--classes", gen.config.classes, "Class count")->capture_default_str();
        sub->add_option("--dim", gen.config.dim, "Embedding dimension")->capture_default_str();
        sub->add_option("--noise", gen.config.noise, "Per-coordinate content noise")->capture_default_str();
        sub->add_option("--mask-prob", gen.config.mask_prob, "Probability of masking question and context")
            ->capture_default_str();
        sub->add_option("--triplets-per-class", gen.config.triplets_per_class, "Knowledge triplets per class")
            ->capture_default_str();
        sub->add_option("--seed", gen.config.seed, "Random seed")->capture_default_str();
        sub->callback([&] { action = [&] { return run_gen_synth(gen); }; });
    }

    EmbedArgs emb;
    {
        auto* sub = app.add_subcommand("embed", "Embed manifest texts with the hashing embedder");
        sub->add_option("--manifest", emb.manifest, "Manifest file")->required()->check(CLI::ExistingFile);
        sub->add_option("--out", emb.out, "Output embedding store")->required();
        sub->add_option("--dim", emb.dim, "Embedding dimension")->capture_default_str();
        sub->add_option("--seed", emb.seed, "Hash seed")->capture_default_str();
        sub->callback([&] { action = [&] { return run_embed(emb); }; });
    }

    BuildGraphsArgs bg;
    {
        auto* sub = app.add_subcommand("build-graphs", "Build per-sample multimodal subgraphs");
        sub->add_option("--manifest", bg.manifest, "Manifest file")->required()->check(CLI::ExistingFile);
        sub->add_option("--embeddings", bg.embeddings, "Content embedding stores, comma separated")
            ->required()
            ->delimiter(',');
        sub->add_option("--triplets", bg.triplets, "Triplet TSV")->required()->check(CLI::ExistingFile);
        sub->add_option("--triplet-embeddings", bg.triplet_embeddings, "Triplet embedding store")
            ->required()
            ->check(CLI::ExistingFile);
        sub->add_option("--k", bg.k, "Triplets retrieved per content node")->capture_default_str();
        sub->add_option("--edge-mode", bg.edge_mode, "Edge weighting")
            ->check(CLI::IsMember({"hybrid", "cosine", "pmi"}))
            ->capture_default_str();
        sub->add_option("--tau", bg.tau, "Content-content cosine threshold")->capture_default_str();
        sub->add_option("--threads", bg.threads, "Worker threads")->check(CLI::PositiveNumber)->capture_default_str();
        sub->add_option("--out", bg.out, "Output graph file")->required();
        sub->callback([&] { action = [&] { return run_build_graphs(bg); }; });
    }

    TrainTeacherArgs tt;
    {
        auto* sub = app.add_subcommand("train-teacher", "Train the graph teacher");
        sub->add_option("--graphs", tt.graphs, "Graph file")->required()->check(CLI::ExistingFile);
        sub->add_option("--hidden", tt.hidden, "GCN hidden width")->capture_default_str();
        sub->add_option("--head-hidden", tt.head_hidden, "Classifier hidden width")->capture_default_str();
        sub->add_option("--epochs", tt.epochs, "Training epochs")->capture_default_str();
        sub->add_option("--optimizer", tt.optimizer, "Optimizer")
            ->check(CLI::IsMember({"adam", "sgd"}))
            ->capture_default_str();
        sub->add_option("--lr", tt.lr, "Learning rate (default 0.001 adam, 0.01 sgd)");
        sub->add_option("--seed", tt.seed, "Random seed")->capture_default_str();
        sub->add_option("--out", tt.out, "Output checkpoint")->required();
        sub->callback([&] { action = [&] { return run_train_teacher(tt); }; });
    }

    DistillArgs ds;
    {
        auto* sub = app.add_subcommand("distill", "Train a student, optionally distilling from teachers");
        sub->add_option("--graphs", ds.graphs, "Graph file")->required()->check(CLI::ExistingFile);
        sub->add_option("--teacher", ds.teachers, "Teacher checkpoints, comma separated")->delimiter(',');
        sub->add_option("--student", ds.student, "Student architecture")
            ->check(CLI::IsMember({"mlp", "transformer", "tiny-transformer"}))
            ->capture_default_str();
        sub->add_option("--hidden", ds.hidden, "Student hidden width")->capture_default_str();
        sub->add_option("--kd-weight", ds.kd_weight, "Distillation weight")->check(CLI::NonNegativeNumber)
            ->capture_default_str();
        sub->add_option("--temperature", ds.temperature, "Softmax temperature")->check(CLI::PositiveNumber)
            ->capture_default_str();
        sub->add_option("--epochs", ds.epochs, "Training epochs")->capture_default_str();
        sub->add_option("--optimizer", ds.optimizer, "Optimizer")
            ->check(CLI::IsMember({"adam", "sgd"}))
            ->capture_default_str();
        sub->add_option("--lr", ds.lr, "Learning rate (default 0.001 adam, 0.01 sgd)");
        sub->add_option("--seed", ds.seed, "Random seed")->capture_default_str();
        sub->add_option("--threads", ds.threads, "Worker threads")->check(CLI::PositiveNumber)->capture_default_str();
        sub->add_option("--soft-labels", ds.soft_labels, "Also write the teacher soft-label cache here");
        sub->add_option("--out", ds.out, "Output checkpoint")->required();
        sub->callback([&] { action = [&] { return run_distill(ds); }; });
    }

    EvalArgs ev;
    {
        auto* sub = app.add_subcommand("eval", "Evaluate a checkpoint on a split");
        sub->add_option("--model", ev.model, "Checkpoint")->required()->check(CLI::ExistingFile);
        sub->add_option("--graphs", ev.graphs, "Graph file")->required()->check(CLI::ExistingFile);
        sub->add_option("--split", ev.split, "Split to evaluate")
            ->check(CLI::IsMember({"train", "val", "test", "all"}))
            ->capture_default_str();
        sub->add_option("--threads", ev.threads, "Worker threads")->check(CLI::PositiveNumber)->capture_default_str();
        sub->add_option("--report", ev.report, "Output report")->required();
        sub->callback([&] { action = [&] { return run_eval(ev); }; });
    }

    CompareArgs cmp;
    {
        auto* sub = app.add_subcommand("compare", "Compare treated runs against their baselines");
        sub->add_option("--baseline", cmp.baseline, "Baseline reports, comma separated")->required()->delimiter(',');
        sub->add_option("--treated", cmp.treated, "Treated reports, paired in order")->required()->delimiter(',');
        sub->add_option("--out", cmp.out, "Output comparison report")->required();
        sub->add_option("--table", cmp.table, "Write the text table here instead of standard output");
        sub->callback([&] { action = [&] { return run_compare(cmp); }; });
    }

    GradcheckArgs gc;
    {
        auto* sub = app.add_subcommand("gradcheck", "Finite-difference check of every model loss");
        sub->add_option("--seed", gc.seed, "Fixture seed")->capture_default_str();
        sub->add_option("--eps", gc.eps, "Central difference step")->check(CLI::PositiveNumber)->capture_default_str();
        sub->add_option("--tolerance", gc.tolerance, "Maximum relative error")->capture_default_str();
        sub->callback([&] { action = [&] { return run_gradcheck(gc); }; });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    try {
        return action();
    } catch (const UsageError& e) {
        std::cerr << "gkd: " << e.what() << "\n" << app.help();
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "gkd: " << e.what() << "\n";
        return classify(e);
    }
}

}  // namespace
}  // namespace gkd

int main(int argc, char** argv) { return gkd::main_impl(argc, argv); }
