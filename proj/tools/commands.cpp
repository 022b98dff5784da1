#include "commands.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "nlohmann/json.hpp"

#include "mirspec/classifier.hpp"
#include "mirspec/cube_io.hpp"
#include "mirspec/dataset.hpp"
#include "mirspec/kmeans.hpp"
#include "mirspec/metrics.hpp"
#include "mirspec/pca.hpp"
#include "mirspec/preprocess.hpp"
#include "mirspec/protocol.hpp"
#include "mirspec/rng.hpp"
#include "mirspec/srd.hpp"
#include "mirspec/svg.hpp"
#include "mirspec/synth.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace mirspec;

namespace mirspec_cli {

namespace {

struct Config {
    std::uint64_t seed = 0;
    unsigned threads = 1;
    std::string out = "out";
    std::string format = "json";  // eval-report format: json or csv
    double half_extent_um = 750.0;
    int folds = 10;
    int repeats = 12;
    int test_per_class = 2;
    std::string level = "core";
    std::vector<std::string> models = {"lda", "forest", "mlp3"};
    std::string blanking_path;
    bool snv = true;
    bool blank = false;           // apply blanking in `preprocess`
    std::string mask_mode = "kmeans";  // none | slice | kmeans
    int pca_components = 2;
    std::size_t mc_samples = 200000;
    int forest_trees = 100;
    int forest_depth = 0;
    int mlp_epochs = 20;
    int mlp_batch = 128;
    double mlp_lr = 1e-3;
    bool save_models = false;

    // synthetic cohort shape (defaults: fast desk-scale geometry)
    std::uint32_t grid = 22;
    double pixel_size_um = 100.0;
    double axis_step_cm = 12.0;
    bool canonical = false;  // 88 x 88 at 25 um, step 4
    double disk_radius_um = 1000.0;
    double noise_std = 0.02;
    double hole_x_um = 300.0, hole_y_um = -200.0, hole_radius_um = 200.0;
    int patients = 17;
    int cores_per_patient = 0;

    // input paths
    std::string in, cube, mask, scores, split_path;
};

void apply_json(Config& cfg, const json& j) {
    auto opt = [&j](const char* key, auto& target) {
        if (j.contains(key)) target = j.at(key).get<std::decay_t<decltype(target)>>();
    };
    opt("seed", cfg.seed);
    opt("threads", cfg.threads);
    opt("out", cfg.out);
    opt("format", cfg.format);
    opt("half_extent_um", cfg.half_extent_um);
    opt("folds", cfg.folds);
    opt("repeats", cfg.repeats);
    opt("test_cores_per_class", cfg.test_per_class);
    opt("level", cfg.level);
    opt("models", cfg.models);
    opt("blanking", cfg.blanking_path);
    opt("snv", cfg.snv);
    opt("apply_blanking", cfg.blank);
    opt("mask_mode", cfg.mask_mode);
    opt("pca_components", cfg.pca_components);
    opt("mc_samples", cfg.mc_samples);
    opt("forest_trees", cfg.forest_trees);
    opt("forest_depth", cfg.forest_depth);
    opt("mlp_epochs", cfg.mlp_epochs);
    opt("mlp_batch", cfg.mlp_batch);
    opt("mlp_lr", cfg.mlp_lr);
    opt("save_models", cfg.save_models);
    opt("grid", cfg.grid);
    opt("pixel_size_um", cfg.pixel_size_um);
    opt("axis_step_cm", cfg.axis_step_cm);
    opt("canonical", cfg.canonical);
    opt("disk_radius_um", cfg.disk_radius_um);
    opt("noise_std", cfg.noise_std);
    opt("hole_x_um", cfg.hole_x_um);
    opt("hole_y_um", cfg.hole_y_um);
    opt("hole_radius_um", cfg.hole_radius_um);
    opt("patients", cfg.patients);
    opt("cores_per_patient", cfg.cores_per_patient);
}

json config_to_json(const Config& cfg) {
    json j;
    j["seed"] = cfg.seed;
    j["threads"] = cfg.threads;
    j["out"] = cfg.out;
    j["format"] = cfg.format;
    j["half_extent_um"] = cfg.half_extent_um;
    j["folds"] = cfg.folds;
    j["repeats"] = cfg.repeats;
    j["test_cores_per_class"] = cfg.test_per_class;
    j["level"] = cfg.level;
    j["models"] = cfg.models;
    j["blanking"] = cfg.blanking_path;
    j["snv"] = cfg.snv;
    j["apply_blanking"] = cfg.blank;
    j["mask_mode"] = cfg.mask_mode;
    j["pca_components"] = cfg.pca_components;
    j["mc_samples"] = cfg.mc_samples;
    j["forest_trees"] = cfg.forest_trees;
    j["forest_depth"] = cfg.forest_depth;
    j["mlp_epochs"] = cfg.mlp_epochs;
    j["mlp_batch"] = cfg.mlp_batch;
    j["mlp_lr"] = cfg.mlp_lr;
    j["save_models"] = cfg.save_models;
    j["grid"] = cfg.grid;
    j["pixel_size_um"] = cfg.pixel_size_um;
    j["axis_step_cm"] = cfg.axis_step_cm;
    j["canonical"] = cfg.canonical;
    j["disk_radius_um"] = cfg.disk_radius_um;
    j["noise_std"] = cfg.noise_std;
    j["hole_x_um"] = cfg.hole_x_um;
    j["hole_y_um"] = cfg.hole_y_um;
    j["hole_radius_um"] = cfg.hole_radius_um;
    j["patients"] = cfg.patients;
    j["cores_per_patient"] = cfg.cores_per_patient;
    return j;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("io", "cannot open for writing: " + path.string());
    out << text;
    if (!out) throw Error("io", "failed to write " + path.string());
}

void write_json(const fs::path& path, const json& j) {
    write_text(path, j.dump(2) + "\n");
}

SynthSpec synth_spec_from(const Config& cfg) {
    SynthSpec spec;
    if (cfg.canonical) {
        spec.width = spec.height = 88;
        spec.pixel_size_um = 25.0;
        spec.axis = WavenumberAxis::canonical();
    } else {
        spec.width = spec.height = cfg.grid;
        spec.pixel_size_um = cfg.pixel_size_um;
        spec.axis = cfg.axis_step_cm == 4.0 ? WavenumberAxis::canonical()
                                            : WavenumberAxis::with_step(cfg.axis_step_cm);
    }
    spec.disk_radius_um = cfg.disk_radius_um;
    spec.noise_std = cfg.noise_std;
    if (cfg.hole_radius_um > 0.0)
        spec.holes = {{cfg.hole_x_um, cfg.hole_y_um, cfg.hole_radius_um}};
    spec.seed = cfg.seed;
    return spec;
}

BlankingSpec blanking_from(const Config& cfg) {
    if (cfg.blanking_path.empty()) return BlankingSpec::defaults();
    std::ifstream in(cfg.blanking_path);
    if (!in) throw Error("io", "cannot open blanking spec: " + cfg.blanking_path);
    json j = json::parse(in);
    BlankingSpec spec;
    for (const auto& pair : j.at("intervals"))
        spec.intervals.emplace_back(pair.at(0).get<double>(),
                                    pair.at(1).get<double>());
    spec.validate();
    return spec;
}

ClassifierSpec classifier_spec_from(const Config& cfg, const std::string& name) {
    ClassifierSpec spec;
    spec.kind = classifier_kind_from_string(name);
    spec.forest.n_trees = cfg.forest_trees;
    spec.forest.max_depth = cfg.forest_depth;
    spec.mlp.epochs = cfg.mlp_epochs;
    spec.mlp.batch_size = cfg.mlp_batch;
    spec.mlp.learning_rate = cfg.mlp_lr;
    return spec;
}

std::vector<MethodSpec> methods_from(const Config& cfg) {
    std::vector<MethodSpec> methods;
    for (const auto& name : cfg.models)
        methods.push_back(method_from_spec(name, classifier_spec_from(cfg, name)));
    return methods;
}

std::vector<std::string> list_scubes(const std::string& dir) {
    std::vector<std::string> files;
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.path().extension() == ".scube")
            files.push_back(entry.path().string());
    std::sort(files.begin(), files.end());
    if (files.empty())
        throw Error("no-input", "no .scube files under " + dir);
    return files;
}

SplitPlan plan_from(const Config& cfg) {
    SplitPlan plan;
    plan.repeats = cfg.repeats;
    plan.test_cores_per_class = cfg.test_per_class;
    plan.level = cfg.level == "patient" ? SplitPlan::Level::Patient
                                        : SplitPlan::Level::Core;
    plan.seed = derive_seed(cfg.seed, 0x5eed5);
    return plan;
}

// ---- subcommands ----------------------------------------------------------

int cmd_synth(const Config& cfg) {
    fs::create_directories(cfg.out);
    const SynthSpec spec = synth_spec_from(cfg);
    const auto layout = cohort_layout(cfg.patients, cfg.cores_per_patient);

    json manifest;
    manifest["seed"] = cfg.seed;
    auto cores = json::array();
    for (const auto& entry : layout) {
        const auto sc = generate_entry(spec, entry);
        const std::string file = entry.core_id + ".scube";
        const std::string truth = entry.core_id + "_truth.pgm";
        write_scube(sc.cube, (fs::path(cfg.out) / file).string());
        write_pgm(sc.ground_truth, sc.cube.width, sc.cube.height,
                  (fs::path(cfg.out) / truth).string());
        json c;
        c["file"] = file;
        c["truth"] = truth;
        c["core_id"] = entry.core_id;
        c["patient_id"] = entry.patient_id;
        c["class"] = to_string(entry.tissue_class);
        cores.push_back(std::move(c));
    }
    manifest["cores"] = std::move(cores);
    write_json(fs::path(cfg.out) / "manifest.json", manifest);
    std::cout << "wrote " << layout.size() << " cores to " << cfg.out << "\n";
    return 0;
}

int cmd_segment(const Config& cfg) {
    fs::create_directories(cfg.out);
    json report;
    auto cores = json::array();
    std::uint64_t stream = 0;
    for (const auto& file : list_scubes(cfg.in)) {
        const auto cube = read_scube(file);
        const auto absorb = cube.mode == SpectrumMode::TransmittancePercent
                                ? to_absorbance(cube)
                                : cube;
        const auto mask = segment_tissue(absorb, derive_seed(cfg.seed, stream++));
        const std::string out_pgm = cube.meta.core_id + "_mask.pgm";
        write_pgm(mask, cube.width, cube.height,
                  (fs::path(cfg.out) / out_pgm).string());
        json c;
        c["core_id"] = cube.meta.core_id;
        c["mask"] = out_pgm;
        c["kept"] = mask.kept_count();
        c["pixels"] = cube.pixel_count();
        cores.push_back(std::move(c));
    }
    report["cores"] = std::move(cores);
    write_json(fs::path(cfg.out) / "segment.json", report);
    return 0;
}

PixelMask mask_for(const Config& cfg, const SpectralCube& cube,
                   const SpectralCube& absorb, std::uint64_t stream) {
    if (cfg.mask_mode == "none") {
        PixelMask mask;
        mask.keep.assign(cube.pixel_count(), 1);
        return mask;
    }
    if (cfg.mask_mode == "slice")
        return slice_rectangle(cube, cfg.half_extent_um, cfg.half_extent_um);
    if (cfg.mask_mode == "kmeans")
        return segment_tissue(absorb, derive_seed(cfg.seed, stream));
    throw Error("bad-flag", "unknown mask mode: " + cfg.mask_mode);
}

int cmd_preprocess(const Config& cfg) {
    fs::create_directories(cfg.out);
    PreprocessChain chain;
    chain.snv = cfg.snv;

    std::vector<SpectralCube> cubes;
    std::vector<PixelMask> masks;
    std::uint64_t stream = 0;
    for (const auto& file : list_scubes(cfg.in)) {
        auto cube = read_scube(file);
        const auto absorb = cube.mode == SpectrumMode::TransmittancePercent
                                ? to_absorbance(cube)
                                : cube;
        masks.push_back(mask_for(cfg, cube, absorb, stream++));
        cubes.push_back(std::move(cube));
    }
    if (cfg.blank)
        chain.blanking = build_blanking_mask(cubes[0].axis, blanking_from(cfg));

    AssembleStats stats;
    const auto table = assemble(cubes, masks, chain, &stats);
    export_csv(table, (fs::path(cfg.out) / "table.csv").string());

    json j;
    j["rows"] = table.row_count();
    j["channels"] = table.channels();
    j["dropped_degenerate"] = stats.dropped_degenerate;
    j["mask_mode"] = cfg.mask_mode;
    j["snv"] = cfg.snv;
    j["blanking_applied"] = cfg.blank;
    write_json(fs::path(cfg.out) / "preprocess.json", j);
    return 0;
}

int cmd_reduce(const Config& cfg) {
    fs::create_directories(cfg.out);
    if (cfg.cube.empty()) throw Error("bad-flag", "--cube is required");
    const auto cube = read_scube(cfg.cube);
    const auto absorb = cube.mode == SpectrumMode::TransmittancePercent
                            ? to_absorbance(cube)
                            : cube;

    PixelMask mask;
    if (!cfg.mask.empty()) {
        std::uint32_t w = 0, h = 0;
        mask = read_pgm(cfg.mask, w, h);
        if (w != cube.width || h != cube.height)
            throw Error("length-mismatch", "mask geometry does not match cube");
    } else {
        mask = mask_for(cfg, cube, absorb, 0);
    }

    // the latent view uses the same absorbance+SNV spectra the models see
    std::vector<PixelMask> all{PixelMask{}};
    all[0].keep.assign(cube.pixel_count(), 1);
    PreprocessChain chain;
    chain.snv = cfg.snv;
    const auto table =
        assemble(std::span(&cube, 1), std::span(all.data(), 1), chain);
    if (table.row_count() != cube.pixel_count())
        throw Error("degenerate-cube",
                    "constant spectra were dropped; cannot align the mask");

    const auto model = pca_fit(table, cfg.pca_components);
    const auto scores = pca_transform(model, table);

    std::string csv = "x,y,kept_flag\n";
    std::vector<double> xs(table.row_count()), ys(table.row_count());
    std::vector<std::uint8_t> kept(table.row_count());
    char buf[80];
    const std::size_t d = model.n_components();
    for (std::size_t i = 0; i < table.row_count(); ++i) {
        xs[i] = scores[i * d];
        ys[i] = d > 1 ? scores[i * d + 1] : 0.0;
        kept[i] = mask.keep[i];
        std::snprintf(buf, sizeof buf, "%.9g,%.9g,%d\n", xs[i], ys[i],
                      static_cast<int>(kept[i]));
        csv += buf;
    }
    write_text(fs::path(cfg.out) / "pca_scores.csv", csv);
    write_scatter_svg((fs::path(cfg.out) / "pca_scatter.svg").string(), xs, ys,
                      kept, "latent view of " + cube.meta.core_id);

    json j;
    j["explained_variance"] = model.explained_variance;
    j["total_variance"] = model.total_variance;
    write_json(fs::path(cfg.out) / "pca.json", j);
    return 0;
}

int cmd_split(const Config& cfg) {
    fs::create_directories(cfg.out);
    if (cfg.in.empty()) throw Error("bad-flag", "--in is required");
    const auto table = import_csv(cfg.in);
    const auto splits = make_splits(table, plan_from(cfg));
    write_json(fs::path(cfg.out) / "split.json", split_to_json(splits));
    return 0;
}

void write_eval_outputs(const Config& cfg, const fs::path& dir,
                        const std::string& tag, const ProtocolResult& result) {
    const std::string suffix = tag.empty() ? "" : "_" + tag;
    if (cfg.format == "csv")
        write_text(dir / ("eval_report" + suffix + ".csv"),
                   report_to_csv(result.report));
    else
        write_json(dir / ("eval_report" + suffix + ".json"),
                   report_to_json(result.report));
    if (result.acc_matrix.n_methods() >= 2)
        result.acc_matrix.write_csv(
            (dir / ("score_matrix" + suffix + ".csv")).string());
    for (const auto& method : result.report.methods) {
        if (method.first_scores.empty()) continue;
        const auto curve = roc_curve(method.first_scores, method.first_labels);
        const double area = auc(method.first_scores, method.first_labels);
        write_roc_svg((dir / ("roc_" + method.name + suffix + ".svg")).string(),
                      curve, area, method.name + " (first repeat)");
    }
}

int cmd_eval(const Config& cfg) {
    fs::create_directories(cfg.out);
    if (cfg.in.empty()) throw Error("bad-flag", "--in is required");
    const auto table = import_csv(cfg.in);
    (void)binary_labels(table);  // single-class tables fail fast here
    const auto splits = make_splits(table, plan_from(cfg));
    const auto methods = methods_from(cfg);
    const auto result =
        run_protocol(table, splits, methods, derive_seed(cfg.seed, 0xe7a1), cfg.threads);
    write_eval_outputs(cfg, cfg.out, "", result);
    write_json(fs::path(cfg.out) / "split.json", split_to_json(splits));

    if (cfg.save_models) {
        for (const auto& name : cfg.models) {
            SpectraTable train;
            train.axis = table.axis;
            train.mode = table.mode;
            for (std::size_t r : splits.repeats[0].train_rows)
                train.append_row(table.rows[r], table.spectrum(r));
            const auto model = fit(classifier_spec_from(cfg, name), train,
                                   cfg.threads);
            write_json(fs::path(cfg.out) / ("model_" + name + ".json"),
                       model->to_json());
        }
    }
    return 0;
}

void rank_outputs(const Config& cfg, const fs::path& dir, const ScoreMatrix& m) {
    const auto srd = srd_compute(m);

    json j;
    j["n_rows"] = srd.n_rows;
    j["max_srd"] = max_srd(srd.n_rows);
    auto arr = json::array();
    for (std::size_t c = 0; c < srd.methods.size(); ++c) {
        json mj;
        mj["method"] = srd.methods[c];
        mj["srd"] = srd.srd_raw[c];
        mj["srd_pct"] = srd.srd_normalized[c];
        arr.push_back(std::move(mj));
    }
    j["methods"] = std::move(arr);
    auto groups = json::array();
    for (const auto& group : srd.degeneracy_groups) {
        auto g = json::array();
        for (std::size_t c : group) g.push_back(srd.methods[c]);
        groups.push_back(std::move(g));
    }
    j["degeneracy_groups"] = std::move(groups);
    write_json(dir / "srd.json", j);

    std::string csv = "method,srd,srd_pct\n";
    char buf[96];
    for (std::size_t c = 0; c < srd.methods.size(); ++c) {
        std::snprintf(buf, sizeof buf, "%s,%.6g,%.6g\n", srd.methods[c].c_str(),
                      srd.srd_raw[c], srd.srd_normalized[c]);
        csv += buf;
    }
    write_text(dir / "srd.csv", csv);

    const auto mode = m.n_rows <= 9 ? CrrnDistribution::Mode::Exact
                                    : CrrnDistribution::Mode::MonteCarlo;
    const auto dist =
        crrn(m.n_rows, mode, cfg.mc_samples, derive_seed(cfg.seed, 0xccc));
    write_srd_svg((dir / "srd_crrn.svg").string(), srd, dist);

    const auto cv = srd_crossval(m, static_cast<std::size_t>(cfg.folds),
                                 derive_seed(cfg.seed, 0xcf));
    write_boxplot_svg((dir / "srd_boxplot.svg").string(), cv);

    json cvj;
    cvj["folds"] = cv.folds;
    auto cvm = json::array();
    for (std::size_t c = 0; c < cv.methods.size(); ++c) {
        json e;
        e["method"] = cv.methods[c];
        e["fold_srd_pct"] = cv.fold_srd[c];
        e["box"] = {{"min", cv.box[c].min},     {"q1", cv.box[c].q1},
                    {"median", cv.box[c].median}, {"q3", cv.box[c].q3},
                    {"max", cv.box[c].max},     {"outliers", cv.box[c].outliers}};
        cvm.push_back(std::move(e));
    }
    cvj["methods"] = std::move(cvm);
    auto wins = json::array();
    for (const auto& row : cv.wins) wins.push_back(row);
    cvj["wins"] = std::move(wins);
    write_json(dir / "srd_crossval.json", cvj);

    // Wilcoxon over every method pair
    std::string wcsv = "method_a,method_b,W,n_effective,p_two_sided,mode\n";
    auto wj = json::array();
    for (std::size_t a = 0; a < m.n_methods(); ++a) {
        for (std::size_t b = a + 1; b < m.n_methods(); ++b) {
            const auto col_a = m.column(a);
            const auto col_b = m.column(b);
            json e;
            e["pair"] = m.methods[a] + "-" + m.methods[b];
            try {
                const auto w = wilcoxon_signed_rank(col_a, col_b);
                e["W"] = w.statistic;
                e["n_effective"] = w.n_effective;
                e["p_two_sided"] = w.p_two_sided;
                e["mode"] = w.mode == WilcoxonResult::Mode::Exact
                                ? "exact"
                                : "normal_approx";
                std::snprintf(buf, sizeof buf, "%s,%s,%.6g,%zu,%.6g,%s\n",
                              m.methods[a].c_str(), m.methods[b].c_str(),
                              w.statistic, w.n_effective, w.p_two_sided,
                              w.mode == WilcoxonResult::Mode::Exact
                                  ? "exact"
                                  : "normal_approx");
                wcsv += buf;
            } catch (const Error& err) {
                e["error"] = err.code();
                std::snprintf(buf, sizeof buf, "%s,%s,,,,%s\n",
                              m.methods[a].c_str(), m.methods[b].c_str(),
                              err.code().c_str());
                wcsv += buf;
            }
            wj.push_back(std::move(e));
        }
    }
    write_text(dir / "wilcoxon.csv", wcsv);
    write_json(dir / "wilcoxon.json", wj);
}

int cmd_rank(const Config& cfg) {
    fs::create_directories(cfg.out);
    if (cfg.scores.empty()) throw Error("bad-flag", "--scores is required");
    const auto m = ScoreMatrix::read_csv(cfg.scores);
    rank_outputs(cfg, cfg.out, m);
    return 0;
}

int cmd_pipeline(const Config& cfg) {
    fs::create_directories(cfg.out);
    const fs::path dir(cfg.out);
    write_json(dir / "effective_config.json", config_to_json(cfg));

    const SynthSpec spec = synth_spec_from(cfg);
    const auto layout = cohort_layout(cfg.patients, cfg.cores_per_patient);

    // per-core generation and mask computation, parallel over cores
    std::vector<SpectralCube> cubes(layout.size());
    std::vector<PixelMask> slice_masks(layout.size());
    std::vector<PixelMask> kmeans_masks(layout.size());
    parallel_for(layout.size(), cfg.threads, [&](std::size_t i) {
        auto sc = generate_entry(spec, layout[i]);
        const auto absorb = to_absorbance(sc.cube);
        slice_masks[i] =
            slice_rectangle(sc.cube, cfg.half_extent_um, cfg.half_extent_um);
        kmeans_masks[i] = segment_tissue(absorb, derive_seed(cfg.seed, 0x5e9 + i));
        cubes[i] = std::move(sc.cube);
    });

    PreprocessChain plain;
    plain.snv = cfg.snv;
    PreprocessChain blanked = plain;
    blanked.blanking = build_blanking_mask(cubes[0].axis, blanking_from(cfg));

    struct Condition {
        std::string tag;
        const std::vector<PixelMask>* masks;
        const PreprocessChain* chain;
    };
    const Condition conditions[] = {{"slice", &slice_masks, &plain},
                                    {"kmeans", &kmeans_masks, &plain},
                                    {"blanked", &kmeans_masks, &blanked}};

    const auto methods = methods_from(cfg);
    ScoreMatrix stacked;
    json manifest;
    auto cond_json = json::array();

    for (const auto& cond : conditions) {
        AssembleStats stats;
        const auto table = assemble(cubes, *cond.masks, *cond.chain, &stats);
        const auto splits = make_splits(table, plan_from(cfg));
        const auto result = run_protocol(table, splits, methods,
                                         derive_seed(cfg.seed, 0xe7a1),
                                         cfg.threads);
        write_eval_outputs(cfg, dir, cond.tag, result);

        if (result.acc_matrix.n_methods() < methods.size())
            std::cerr << "[mirspec] warning: a method failed in condition "
                      << cond.tag << "; it is dropped from the SRD matrix\n";
        if (stacked.methods.empty()) {
            stacked.methods = result.acc_matrix.methods;
        } else if (stacked.methods != result.acc_matrix.methods) {
            throw Error("method-mismatch",
                        "conditions disagree on the surviving methods");
        }
        stacked.values.insert(stacked.values.end(),
                              result.acc_matrix.values.begin(),
                              result.acc_matrix.values.end());
        stacked.n_rows += result.acc_matrix.n_rows;

        json cj;
        cj["condition"] = cond.tag;
        cj["rows"] = table.row_count();
        cj["channels"] = table.channels();
        cj["dropped_degenerate"] = stats.dropped_degenerate;
        cond_json.push_back(std::move(cj));
    }

    stacked.write_csv((dir / "score_matrix.csv").string());
    rank_outputs(cfg, dir, stacked);

    manifest["conditions"] = std::move(cond_json);
    manifest["score_matrix_rows"] = stacked.n_rows;
    manifest["methods"] = stacked.methods;
    write_json(dir / "manifest.json", manifest);
    return 0;
}

std::string find_config_path(int argc, char** argv) {
    for (int i = 1; i + 1 < argc; ++i)
        if (std::string(argv[i]) == "--config") return argv[i + 1];
    return {};
}

}  // namespace

int run(int argc, char** argv) {
    Config cfg;
    try {
        const auto config_path = find_config_path(argc, argv);
        if (!config_path.empty()) {
            std::ifstream in(config_path);
            if (!in) throw Error("io", "cannot open config: " + config_path);
            apply_json(cfg, json::parse(in));
        }
    } catch (const Error& e) {
        std::cerr << json{{"error", {{"code", e.code()}, {"message", e.what()}}}}
                         .dump()
                  << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << json{{"error",
                           {{"code", "bad-config"}, {"message", e.what()}}}}
                         .dump()
                  << "\n";
        return 1;
    }

    CLI::App app{"mid-infrared tissue classification pipeline"};
    app.require_subcommand(1);
    std::string config_dummy;
    app.add_option("--config", config_dummy, "JSON config file");

    auto add_common = [&cfg, &config_dummy](CLI::App* sub) {
        sub->add_option("--seed", cfg.seed, "RNG seed");
        sub->add_option("--threads", cfg.threads, "worker thread cap");
        sub->add_option("--out", cfg.out, "output directory");
        sub->add_option("--format", cfg.format, "report format: json|csv")
            ->check(CLI::IsMember({"json", "csv"}));
        // the value itself is consumed by the pre-pass
        sub->add_option("--config", config_dummy, "JSON config file");
    };

    auto* synth = app.add_subcommand("synth", "generate a synthetic cohort");
    add_common(synth);
    synth->add_option("--patients", cfg.patients, "patients in the cohort");
    synth->add_option("--cores-per-patient", cfg.cores_per_patient,
                      "cores per patient (0 = default 62-core layout)");
    synth->add_option("--grid", cfg.grid, "core grid width/height in pixels");
    synth->add_option("--pixel-size-um", cfg.pixel_size_um, "pixel pitch");
    synth->add_option("--axis-step", cfg.axis_step_cm, "wavenumber step");
    synth->add_flag("--canonical", cfg.canonical,
                    "88x88 grid at 25 um with the 814-channel axis");
    synth->add_option("--noise-std", cfg.noise_std, "absorbance noise");

    auto* preprocess =
        app.add_subcommand("preprocess", "cubes + masks -> spectra table CSV");
    add_common(preprocess);
    preprocess->add_option("--in", cfg.in, "directory of .scube files")
        ->required();
    preprocess->add_option("--mask-mode", cfg.mask_mode, "none|slice|kmeans")
        ->check(CLI::IsMember({"none", "slice", "kmeans"}));
    preprocess->add_option("--half-extent-um", cfg.half_extent_um,
                           "slice half-extent");
    preprocess->add_flag("!--no-snv", cfg.snv, "skip SNV normalization");
    preprocess->add_flag("--blank", cfg.blank, "apply the blanking filters");
    preprocess->add_option("--blanking", cfg.blanking_path,
                           "blanking intervals JSON");

    auto* segment = app.add_subcommand("segment", "K-means tissue masks");
    add_common(segment);
    segment->add_option("--in", cfg.in, "directory of .scube files")->required();

    auto* reduce = app.add_subcommand("reduce", "PCA latent view of one core");
    add_common(reduce);
    reduce->add_option("--cube", cfg.cube, ".scube file")->required();
    reduce->add_option("--mask", cfg.mask, "PGM mask (else --mask-mode)");
    reduce->add_option("--mask-mode", cfg.mask_mode, "none|slice|kmeans");
    reduce->add_option("--half-extent-um", cfg.half_extent_um,
                       "slice half-extent");
    reduce->add_option("--d", cfg.pca_components, "PCA components");

    auto* split = app.add_subcommand("split", "train/test split manifest");
    add_common(split);
    split->add_option("--in", cfg.in, "spectra table CSV")->required();
    split->add_option("--repeats", cfg.repeats, "number of splits");
    split->add_option("--test-per-class", cfg.test_per_class,
                      "test cores per class");
    split->add_option("--level", cfg.level, "core|patient")
        ->check(CLI::IsMember({"core", "patient"}));

    auto* eval = app.add_subcommand("eval", "repeated-split evaluation");
    add_common(eval);
    eval->add_option("--in", cfg.in, "spectra table CSV")->required();
    eval->add_option("--repeats", cfg.repeats, "number of splits");
    eval->add_option("--test-per-class", cfg.test_per_class,
                     "test cores per class");
    eval->add_option("--level", cfg.level, "core|patient")
        ->check(CLI::IsMember({"core", "patient"}));
    eval->add_option("--models", cfg.models, "subset of lda,forest,mlp3");
    eval->add_option("--forest-trees", cfg.forest_trees, "trees per forest");
    eval->add_option("--mlp-epochs", cfg.mlp_epochs, "MLP training epochs");
    eval->add_flag("--save-models", cfg.save_models,
                   "serialize first-repeat models");

    auto* rank = app.add_subcommand("rank", "SRD / CRRN / Wilcoxon ranking");
    add_common(rank);
    rank->add_option("--scores", cfg.scores, "score matrix CSV")->required();
    rank->add_option("--folds", cfg.folds, "cross-validation folds");
    rank->add_option("--mc-samples", cfg.mc_samples, "CRRN Monte Carlo draws");

    auto* pipeline =
        app.add_subcommand("pipeline", "synthetic end-to-end workflow");
    add_common(pipeline);
    pipeline->add_option("--repeats", cfg.repeats, "splits per condition");
    pipeline->add_option("--folds", cfg.folds, "SRD cross-validation folds");
    pipeline->add_option("--half-extent-um", cfg.half_extent_um,
                         "slice half-extent");
    pipeline->add_option("--blanking", cfg.blanking_path,
                         "blanking intervals JSON");
    pipeline->add_option("--models", cfg.models, "subset of lda,forest,mlp3");
    pipeline->add_option("--patients", cfg.patients, "patients in the cohort");
    pipeline->add_option("--cores-per-patient", cfg.cores_per_patient,
                         "cores per patient (0 = default layout)");
    pipeline->add_option("--grid", cfg.grid, "core grid width/height");
    pipeline->add_option("--pixel-size-um", cfg.pixel_size_um, "pixel pitch");
    pipeline->add_option("--axis-step", cfg.axis_step_cm, "wavenumber step");
    pipeline->add_option("--forest-trees", cfg.forest_trees, "trees per forest");
    pipeline->add_option("--mlp-epochs", cfg.mlp_epochs, "MLP training epochs");
    pipeline->add_option("--mc-samples", cfg.mc_samples,
                         "CRRN Monte Carlo draws");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        std::cerr << json{{"error",
                           {{"code", "bad-flag"}, {"message", e.what()}}}}
                         .dump()
                  << "\n";
        return 1;
    }

    try {
        if (synth->parsed()) return cmd_synth(cfg);
        if (preprocess->parsed()) return cmd_preprocess(cfg);
        if (segment->parsed()) return cmd_segment(cfg);
        if (reduce->parsed()) return cmd_reduce(cfg);
        if (split->parsed()) return cmd_split(cfg);
        if (eval->parsed()) return cmd_eval(cfg);
        if (rank->parsed()) return cmd_rank(cfg);
        if (pipeline->parsed()) return cmd_pipeline(cfg);
        throw Error("bad-flag", "no subcommand given");
    } catch (const Error& e) {
        std::cerr << json{{"error", {{"code", e.code()}, {"message", e.what()}}}}
                         .dump()
                  << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << json{{"error",
                           {{"code", "internal"}, {"message", e.what()}}}}
                         .dump()
                  << "\n";
        return 1;
    }
}

}  // namespace mirspec_cli
