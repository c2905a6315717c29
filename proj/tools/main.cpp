// Copyright (c) 2026 The lorahull authors
// SPDX-License-Identifier: Apache-2.0

#include <array>
#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "lorahull/checkpoint.hpp"
#include "lorahull/compose.hpp"
#include "lorahull/diagnostics.hpp"
#include "lorahull/errors.hpp"
#include "lorahull/manifest.hpp"
#include "lorahull/sweep.hpp"
#include "lorahull/synthetic.hpp"
#include "lorahull/table_io.hpp"

namespace {

using namespace lorahull;

void print_warnings(const std::vector<std::string>& warnings) {
    for (const std::string& w : warnings) std::cerr << "warning: " << w << "\n";
}

struct MergeArgs {
    std::string manifest;
    std::vector<float> alpha;
    std::vector<float> lambda;
    std::string out;
    bool dense = false;
    bool lowrank = false;
    std::size_t recompress_rank = 0;
    bool normalize_lambda = false;
};

void run_merge(const MergeArgs& args) {
    const AnchorSet set = load_anchor_manifest(args.manifest);
    const CheckedMixSpec checked =
        validate_mixspec(MixSpec{args.alpha, args.lambda}, set.size(), args.normalize_lambda);
    print_warnings(checked.warnings);

    const CompositeAdapter composite = compose_multi(set, checked.spec);

    std::string alpha_str, lambda_str;
    for (std::size_t i = 0; i < checked.spec.alpha.size(); ++i) {
        if (i) {
            alpha_str += ",";
            lambda_str += ",";
        }
        alpha_str += format_real(checked.spec.alpha[i]);
        lambda_str += format_real(checked.spec.lambda[i]);
    }

    if (args.dense) {
        std::map<std::string, Matrix> tensors = to_dense(composite);
        std::map<std::string, std::string> metadata{
            {"kind", "dense-delta"}, {"alpha", alpha_str}, {"lambda", lambda_str}};
        write_checkpoint(tensors, metadata, args.out);
        std::cout << "wrote dense deltas for " << tensors.size() << " layer(s) to " << args.out
                  << "\n";
        return;
    }

    Adapter merged = to_lowrank_concat(composite);
    if (args.recompress_rank > 0) {
        merged = recompress(merged, args.recompress_rank);
    }
    merged.meta()["alpha"] = alpha_str;
    merged.meta()["lambda"] = lambda_str;
    write_adapter_checkpoint(merged, args.out);

    std::size_t max_rank = 0;
    for (const auto& [name, layer] : merged.layers()) {
        (void)name;
        max_rank = std::max(max_rank, layer.rank());
    }
    std::cout << "wrote merged adapter (" << merged.layer_count() << " layer(s), rank "
              << max_rank << ") to " << args.out << "\n";
}

struct SweepArgs {
    std::string manifest;
    std::string synthetic_spec;
    std::optional<std::uint64_t> seed;
    std::string plan;
    std::size_t attr = 0;
    std::vector<std::size_t> attrs;
    float alpha_min = 0.0f;
    float alpha_max = 1.0f;
    std::size_t steps = 11;
    bool extrapolate = false;
    std::vector<float> alpha_grid{0.0f, 0.25f, 0.5f, 0.75f, 1.0f};
    float lambda_i = 0.6f;
    float fixed_alpha_others = 0.0f;
    float alpha_i = 1.0f;
    std::vector<float> lambda_grid;
    std::size_t resolution = 10;
    float alpha_common = 1.0f;
    std::string scores_file;
    std::string out;
    std::string format = "csv";
};

void run_sweep_cmd(const SweepArgs& args) {
    if (args.manifest.empty() == args.synthetic_spec.empty()) {
        throw ValidationError("pass exactly one of --manifest or --synthetic");
    }

    AnchorSet set;
    Scorer scorer;
    if (!args.synthetic_spec.empty()) {
        SyntheticSpec spec = read_synthetic_spec(args.synthetic_spec);
        if (args.seed) spec.seed = *args.seed;
        auto [generated, oracle] = gen_anchor_set(spec);
        set = std::move(generated);
        scorer = [oracle = std::move(oracle)](const std::string&, const CompositeAdapter& c) {
            return oracle_score(oracle, c);
        };
    } else {
        set = load_anchor_manifest(args.manifest);
    }
    if (!args.scores_file.empty()) {
        auto table = load_scores(args.scores_file, set.size());
        scorer = [table = std::move(table)](const std::string& row_id, const CompositeAdapter&) {
            auto it = table.find(row_id);
            if (it == table.end()) {
                throw IoError("no external score for row '" + row_id + "'");
            }
            return it->second;
        };
    }

    SweepPlan plan;
    if (args.plan == "alpha") {
        float lo = args.alpha_min, hi = args.alpha_max;
        std::size_t steps = args.steps;
        if (args.extrapolate) {
            lo = -3.0f;
            hi = 4.0f;
            steps = 29;
        }
        plan = plan_alpha_line(set.size(), args.attr, lo, hi, steps);
    } else if (args.plan == "spider") {
        plan = plan_spider(set.size(), args.attr, args.alpha_grid, args.lambda_i,
                           args.fixed_alpha_others);
    } else if (args.plan == "lambda") {
        std::vector<float> grid = args.lambda_grid;
        if (grid.empty()) {
            for (int i = 0; i <= 10; ++i) grid.push_back(static_cast<float>(i) / 10.0f);
        }
        plan = plan_lambda_line(set.size(), args.attr, args.alpha_i, grid,
                                args.fixed_alpha_others);
    } else if (args.plan == "simplex") {
        if (args.attrs.size() != 3) {
            throw ValidationError("--attrs must list exactly three attribute indices");
        }
        plan = plan_simplex(set.size(), {args.attrs[0], args.attrs[1], args.attrs[2]},
                            args.resolution, args.alpha_common);
    } else {
        throw ValidationError("unknown plan kind '" + args.plan + "'");
    }

    const SweepResult result = run_sweep(plan, set, scorer);
    print_warnings(result.warnings);
    export_sweep(result, args.out, table_format_from_string(args.format));
    std::cout << "plan " << plan.id << ": wrote " << result.rows.size() << " row(s) to "
              << args.out << "\n";
}

struct DiagArgs {
    std::string manifest;
    std::string metric;
    bool factor_mode = false;
    std::string out;
    std::string format = "csv";
};

void run_diag(const DiagArgs& args) {
    const AnchorSet set = load_anchor_manifest(args.manifest);
    std::vector<Adapter> adapters;
    adapters.reserve(2 * set.size());
    for (const AnchorPair& pair : set.pairs) {
        adapters.push_back(pair.minus);
        adapters.push_back(pair.plus);
    }

    SimilarityMatrix matrix{{}, Matrix(1, 1), {}};
    if (args.metric == "cosine") {
        matrix = pairwise_cosine(adapters, args.factor_mode);
    } else if (args.metric == "l2") {
        if (args.factor_mode) {
            throw ValidationError("--factor-mode applies to the cosine metric only");
        }
        matrix = pairwise_sq_l2(adapters);
    } else {
        throw ValidationError("unknown metric '" + args.metric + "' (expected cosine or l2)");
    }
    print_warnings(matrix.warnings);
    export_similarity(matrix, args.out, table_format_from_string(args.format));
    std::cout << "wrote " << matrix.labels.size() << "x" << matrix.labels.size() << " " << args.metric
              << " matrix to " << args.out << "\n";
}

struct MdsArgs {
    std::string manifest;
    double trajectories = 0.0;
    std::size_t dim = 2;
    std::string out;
    std::string format = "csv";
};

void run_mds(const MdsArgs& args) {
    const AnchorSet set = load_anchor_manifest(args.manifest);
    const auto cloud = mds_point_cloud(set, args.trajectories);
    const SimilarityMatrix distances = snapshot_distances(cloud);
    const MdsEmbedding embedding = mds_embed(distances, args.dim);
    print_warnings(embedding.warnings);
    export_mds(embedding, args.out, table_format_from_string(args.format));
    std::cout << "embedded " << embedding.labels.size() << " point(s) into " << args.dim
              << "-d coordinates at " << args.out << "\n";
}

struct SynthArgs {
    std::string spec;
    std::optional<std::uint64_t> seed;
    std::string out;
};

void run_synth(const SynthArgs& args) {
    SyntheticSpec spec = read_synthetic_spec(args.spec);
    if (args.seed) spec.seed = *args.seed;
    auto [set, oracle] = gen_anchor_set(spec);
    const auto written = write_synthetic_bundle(set, oracle, args.out);
    for (const auto& path : written) std::cout << "wrote " << path.string() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"lorahull: continuous interpolation and mixing over low-rank adapter checkpoints"};
    app.require_subcommand(1);

    MergeArgs merge_args;
    CLI::App* merge = app.add_subcommand("merge", "Compose one model from anchors and write it");
    merge->add_option("--manifest", merge_args.manifest, "Anchor manifest JSON")->required();
    merge->add_option("--alpha", merge_args.alpha, "Per-attribute interpolation weights")
        ->required()
        ->delimiter(',');
    merge->add_option("--lambda", merge_args.lambda, "Per-attribute mixing weights")
        ->required()
        ->delimiter(',');
    merge->add_option("--out", merge_args.out, "Output checkpoint path")->required();
    CLI::Option* dense_flag = merge->add_flag("--dense", merge_args.dense,
                                              "Write dense per-layer deltas");
    merge->add_flag("--lowrank", merge_args.lowrank,
                    "Write the concatenated low-rank adapter (default)")
        ->excludes(dense_flag);
    merge->add_option("--recompress", merge_args.recompress_rank,
                      "Truncate the merged adapter to this rank via SVD");
    merge->add_flag("--normalize-lambda", merge_args.normalize_lambda,
                    "Rescale lambda onto the simplex instead of rejecting it");
    merge->callback([&]() { run_merge(merge_args); });

    SweepArgs sweep_args;
    CLI::App* sweep = app.add_subcommand("sweep", "Generate and run a configuration sweep");
    sweep->add_option("--manifest", sweep_args.manifest, "Anchor manifest JSON");
    sweep->add_option("--synthetic", sweep_args.synthetic_spec,
                      "Synthetic spec JSON; sweeps the generated anchors with the analytic oracle");
    sweep->add_option("--seed", sweep_args.seed, "Override the synthetic spec seed");
    sweep->add_option("--plan", sweep_args.plan, "Plan kind")
        ->required()
        ->check(CLI::IsMember({"alpha", "spider", "lambda", "simplex"}));
    sweep->add_option("--attr", sweep_args.attr, "Varied attribute index (alpha/spider/lambda)");
    sweep->add_option("--attrs", sweep_args.attrs, "Three attribute indices (simplex)")
        ->delimiter(',');
    sweep->add_option("--alpha-min", sweep_args.alpha_min, "Alpha line start (default 0)");
    sweep->add_option("--alpha-max", sweep_args.alpha_max, "Alpha line end (default 1)");
    sweep->add_option("--steps", sweep_args.steps, "Alpha line point count (default 11)");
    sweep->add_flag("--extrapolate", sweep_args.extrapolate,
                    "Preset: 29 points over [-3, 4] for extrapolation studies");
    sweep->add_option("--alpha-grid", sweep_args.alpha_grid,
                      "Spider alpha grid (default 0,0.25,0.5,0.75,1)")
        ->delimiter(',');
    sweep->add_option("--lambda-i", sweep_args.lambda_i,
                      "Mixing weight of the varied attribute (spider, default 0.6)");
    sweep->add_option("--fixed-alpha-others", sweep_args.fixed_alpha_others,
                      "Alpha for the remaining attributes, 0 or 1 (default 0)");
    sweep->add_option("--alpha-i", sweep_args.alpha_i,
                      "Fixed alpha of the varied attribute for lambda lines, 0 or 1 (default 1)");
    sweep->add_option("--lambda-grid", sweep_args.lambda_grid,
                      "Lambda line grid (default 0,0.1,...,1)")
        ->delimiter(',');
    sweep->add_option("--resolution", sweep_args.resolution,
                      "Simplex subdivision m: (m+1)(m+2)/2 rows (default 10)");
    sweep->add_option("--alpha-common", sweep_args.alpha_common,
                      "Alpha shared by the three simplex attributes (default 1)");
    sweep->add_option("--scores", sweep_args.scores_file,
                      "External per-row scores (CSV or JSON) to join by row_id");
    sweep->add_option("--out", sweep_args.out, "Output table path")->required();
    sweep->add_option("--format", sweep_args.format, "csv or json (default csv)")
        ->check(CLI::IsMember({"csv", "json"}));
    sweep->callback([&]() { run_sweep_cmd(sweep_args); });

    DiagArgs diag_args;
    CLI::App* diag = app.add_subcommand("diag", "Pairwise weight-space diagnostics");
    diag->add_option("metric", diag_args.metric, "cosine or l2")->required();
    diag->add_option("--manifest", diag_args.manifest, "Anchor manifest JSON")->required();
    diag->add_flag("--factor-mode", diag_args.factor_mode,
                   "Cosine over concatenated raw (B, A) factors instead of dense deltas");
    diag->add_option("--out", diag_args.out, "Output table path")->required();
    diag->add_option("--format", diag_args.format, "csv or json (default csv)")
        ->check(CLI::IsMember({"csv", "json"}));
    diag->callback([&]() { run_diag(diag_args); });

    MdsArgs mds_args;
    CLI::App* mds = app.add_subcommand("mds", "Classical MDS embedding of anchors and interpolants");
    mds->add_option("--manifest", mds_args.manifest, "Anchor manifest JSON")->required();
    mds->add_option("--trajectories", mds_args.trajectories,
                    "Include per-attribute interpolation trajectories at this alpha step");
    mds->add_option("--dim", mds_args.dim, "Embedding dimension (default 2)");
    mds->add_option("--out", mds_args.out, "Output table path")->required();
    mds->add_option("--format", mds_args.format, "csv or json (default csv)")
        ->check(CLI::IsMember({"csv", "json"}));
    mds->callback([&]() { run_mds(mds_args); });

    SynthArgs synth_args;
    CLI::App* synth = app.add_subcommand("synth", "Generate a synthetic anchor set plus oracle");
    synth->add_option("--spec", synth_args.spec, "Synthetic spec JSON")->required();
    synth->add_option("--seed", synth_args.seed, "Override the spec seed");
    synth->add_option("--out", synth_args.out, "Output directory")->required();
    synth->callback([&]() { run_synth(synth_args); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1; // flag misuse is a validation error
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const NumericError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
