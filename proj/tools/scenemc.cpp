// scenemc: batch driver for the holistic scene/pose engine.
//
//   fit-hoi  <samples.json> <out_priors.json>     fit per-action Gaussian priors
//   synth    <spec.json> <out_dir> [-n N]         generate ground-truth scenes + observations
//   infer    <obs.json> <priors.json> <out.json>  run the four-phase MCMC
//   eval     <est.json> <gt.json> <obs.json>      compute metrics
//   render   <scene.json> <obs.json> <out.svg>    draw 2D overlays
//
// Exit codes: 0 ok, 2 input/schema error, 3 infeasible or insufficient data,
// 4 runtime inference failure.

#include "scenemc/config.hpp"
#include "scenemc/io.hpp"
#include "scenemc/render.hpp"

#include <CLI11.hpp>

#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <thread>

namespace fs = std::filesystem;
using namespace scenemc;

namespace {

RunConfig load_run_config(const std::string& config_flag) {
    std::string path = config_flag;
    if (path.empty()) {
        if (const char* env = std::getenv("SCENEMC_CONFIG")) path = env;
    }
    if (path.empty()) return RunConfig{};
    std::ifstream in(path);
    if (!in) throw InvalidInputError("cannot open config file: " + path);
    std::ostringstream text;
    text << in.rdbuf();
    RunConfig cfg = parse_config(text.str());
    if (!cfg.priors_path.empty() && !fs::exists(cfg.priors_path))
        throw InvalidInputError("config paths.priors does not exist: " + cfg.priors_path);
    return cfg;
}

HoiPriorSet load_priors_or_default(const std::string& flag_path, const RunConfig& cfg) {
    if (!flag_path.empty()) return priors_from_json(load_json(flag_path));
    if (!cfg.priors_path.empty()) return priors_from_json(load_json(cfg.priors_path));
    return default_hoi_priors();
}

int cmd_fit_hoi(const std::string& samples_file, const std::string& out_file) {
    const std::vector<HoiSample> samples = samples_from_json(load_json(samples_file));
    std::map<std::string, std::vector<Vec3>> by_action;
    for (const auto& s : samples) by_action[s.action].push_back(s.offset);
    if (by_action.empty()) throw InsufficientDataError("samples file contains no records");

    HoiPriorSet set;
    for (const auto& [action, offsets] : by_action) {
        const HoiPrior prior = fit_prior(action, offsets);
        std::printf("%-16s %5zu samples  mean = (%.4f, %.4f, %.4f)\n", action.c_str(),
                    offsets.size(), prior.mean.x(), prior.mean.y(), prior.mean.z());
        set.priors[action] = prior;
    }
    save_json(out_file, priors_to_json(set));
    std::printf("wrote %zu priors to %s\n", set.priors.size(), out_file.c_str());
    return 0;
}

int cmd_synth(const std::string& spec_file, const std::string& out_dir, int n_scenes, int jobs,
              const std::string& priors_flag, const RunConfig& cfg, bool seed_given,
              uint64_t seed_override) {
    SceneSpec spec = spec_from_json(load_json(spec_file));
    if (seed_given) spec.seed = seed_override;
    const HoiPriorSet priors = load_priors_or_default(priors_flag, cfg);
    fs::create_directories(out_dir);

    struct SceneFiles {
        uint64_t seed = 0;
        Json scene;
        Json obs;
    };
    std::vector<SceneFiles> results(static_cast<size_t>(n_scenes));
    std::atomic<int> next{0};
    std::atomic<bool> failed{false};
    std::string failure;
    std::mutex failure_mutex;

    auto worker = [&] {
        for (;;) {
            const int i = next.fetch_add(1);
            if (i >= n_scenes || failed.load()) return;
            const uint64_t seed = spec.seed + 1000003ull * static_cast<uint64_t>(i);
            try {
                GeneratedScene g = generate_scene_retrying(spec, priors, seed);
                results[static_cast<size_t>(i)] = {seed, scene_to_json(g.gt), obs_to_json(g.obs)};
            } catch (const GenerationError& e) {
                std::lock_guard<std::mutex> lock(failure_mutex);
                failure = e.what();
                failed.store(true);
                return;
            }
        }
    };
    const int n_workers = std::max(1, std::min(jobs, n_scenes));
    std::vector<std::thread> pool;
    for (int w = 0; w < n_workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (failed.load()) throw GenerationError(failure);

    Json manifest;
    manifest["$schema"] = "manifest/v1";
    Json entries = Json::array();
    char name[64];
    for (int i = 0; i < n_scenes; ++i) {
        std::snprintf(name, sizeof(name), "scene_%03d.json", i);
        const std::string scene_name = name;
        std::snprintf(name, sizeof(name), "obs_%03d.json", i);
        const std::string obs_name = name;
        save_json((fs::path(out_dir) / scene_name).string(), results[static_cast<size_t>(i)].scene);
        save_json((fs::path(out_dir) / obs_name).string(), results[static_cast<size_t>(i)].obs);
        entries.push_back(Json{{"index", i},
                               {"seed", results[static_cast<size_t>(i)].seed},
                               {"scene", scene_name},
                               {"obs", obs_name}});
    }
    manifest["scenes"] = std::move(entries);
    save_json((fs::path(out_dir) / "manifest.json").string(), manifest);
    std::printf("wrote %d scene/observation pairs to %s\n", n_scenes, out_dir.c_str());
    return 0;
}

std::array<bool, 4> parse_phases(const std::string& phases_flag) {
    if (phases_flag.empty()) return {true, true, true, true};
    std::array<bool, 4> out = {false, false, false, false};
    std::istringstream in(phases_flag);
    std::string token;
    while (std::getline(in, token, ',')) {
        int p = 0;
        try {
            p = std::stoi(token);
        } catch (const std::exception&) {
            throw InvalidInputError("--phases expects comma-separated numbers 1-4");
        }
        if (p < 1 || p > 4) throw InvalidInputError("--phases values must be in 1..4");
        out[static_cast<size_t>(p - 1)] = true;
    }
    return out;
}

int cmd_infer(const std::string& obs_file, const std::string& priors_file,
              const std::string& out_file, const std::string& trace_file,
              const std::string& phases_flag, RunConfig cfg, bool seed_given,
              uint64_t seed_override) {
    const Observations obs = obs_from_json(load_json(obs_file));
    const HoiPriorSet priors = priors_from_json(load_json(priors_file));
    cfg.options.phases = parse_phases(phases_flag);
    const uint64_t seed = seed_given ? seed_override : cfg.seed;

    // Every confidently detected HOI action needs a prior before we start.
    for (const auto& pose : obs.det_poses) {
        for (const auto& a : pose.actions) {
            const auto& vocab = hoi_action_vocabulary();
            const bool is_hoi = std::find(vocab.begin(), vocab.end(), a.label) != vocab.end();
            if (is_hoi && a.confidence >= cfg.options.hoi_conf_threshold && !priors.has(a.label))
                throw MissingPriorError("no prior for detected action: " + a.label);
        }
    }

    ParseGraph init;
    InferenceResult res;
    try {
        init = init_scene(obs, cfg.options);
        res = run_inference(init, obs, priors, cfg.weights, cfg.options, seed);
    } catch (const SchemaError&) {
        throw;
    } catch (const InvalidParameterError&) {
        throw;  // bad config surfaces as an input error
    } catch (const Error& e) {
        throw InitializationError(std::string("inference aborted: ") + e.what());
    }

    for (const auto& w : res.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
    save_json(out_file, scene_to_json(res.pg));
    const std::string trace_path = trace_file.empty() ? out_file + ".trace.jsonl" : trace_file;
    save_text(trace_path, trace_to_jsonl(res.trace));
    std::printf("final energy: total=%.6g support=%.6g collision=%.6g hoi=%.6g "
                "lik_obj=%.6g lik_pose=%.6g (%zu trace records)\n",
                res.breakdown.total, res.breakdown.e_support, res.breakdown.e_collision,
                res.breakdown.e_hoi, res.breakdown.e_likelihood_obj,
                res.breakdown.e_likelihood_pose, res.trace.size());
    return 0;
}

int cmd_eval(const std::string& est_file, const std::string& gt_file, const std::string& obs_file,
             const std::string& out_file, const std::string& csv_file) {
    const ParseGraph est = scene_from_json(load_json(est_file));
    const ParseGraph gt = scene_from_json(load_json(gt_file));
    const Observations obs = obs_from_json(load_json(obs_file));
    Metrics m;
    try {
        m = evaluate(est, gt, obs);
    } catch (const UndefinedMetricsError& e) {
        throw SchemaError(e.what());  // empty ground truth is an input error
    }
    const Json j = metrics_to_json(m);
    std::printf("%s\n", j.dump(2).c_str());
    if (!out_file.empty()) save_json(out_file, j);
    if (!csv_file.empty()) {
        const bool fresh = !fs::exists(csv_file) || fs::file_size(csv_file) == 0;
        std::ofstream csv(csv_file, std::ios::app);
        if (!csv) throw Error("cannot write csv file: " + csv_file);
        if (fresh) csv << metrics_csv_header() << "\n";
        csv << metrics_csv_row(fs::path(est_file).stem().string(), m) << "\n";
    }
    return 0;
}

int cmd_render(const std::string& pg_file, const std::string& obs_file,
               const std::string& out_file) {
    const ParseGraph pg = scene_from_json(load_json(pg_file));
    const Observations obs = obs_from_json(load_json(obs_file));
    save_text(out_file, render_svg(pg, obs));
    std::printf("wrote %s\n", out_file.c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"scenemc: joint 3D scene and human pose reconstruction by annealed MCMC"};
    app.require_subcommand(0, 1);
    app.fallthrough();

    std::string config_flag;
    bool dump_defaults = false;
    uint64_t seed_override = 0;
    app.add_option("--config", config_flag, "run configuration file (or $SCENEMC_CONFIG)");
    app.add_flag("--dump-defaults", dump_defaults, "print the default configuration and exit");
    CLI::Option* seed_opt = app.add_option("--seed", seed_override, "seed override");

    auto* fit = app.add_subcommand("fit-hoi", "fit per-action HOI priors from offset samples");
    std::string samples_file, prior_out;
    fit->add_option("samples", samples_file, "hoi-samples/v1 JSON file")->required();
    fit->add_option("output", prior_out, "output hoi-prior/v1 JSON file")->required();

    auto* synth = app.add_subcommand("synth", "generate synthetic scenes and observations");
    std::string spec_file, out_dir, synth_priors;
    int n_scenes = 1, jobs = 1;
    synth->add_option("spec", spec_file, "scene-spec/v1 JSON file")->required();
    synth->add_option("out_dir", out_dir, "output directory")->required();
    synth->add_option("-n,--scenes", n_scenes, "number of scenes")->check(CLI::PositiveNumber);
    synth->add_option("--jobs", jobs, "parallel scene workers")->check(CLI::PositiveNumber);
    synth->add_option("--priors", synth_priors, "hoi-prior/v1 file used for human placement");

    auto* infer = app.add_subcommand("infer", "run joint inference on observations");
    std::string obs_file, infer_priors, infer_out, trace_file, phases_flag;
    infer->add_option("obs", obs_file, "obs/v1 JSON file")->required();
    infer->add_option("priors", infer_priors, "hoi-prior/v1 JSON file")->required();
    infer->add_option("output", infer_out, "output scene/v1 JSON file")->required();
    infer->add_option("--trace", trace_file, "trace output (default: <output>.trace.jsonl)");
    infer->add_option("--phases", phases_flag, "comma-separated phases to run, e.g. 1,2,3,4");

    auto* eval = app.add_subcommand("eval", "evaluate an estimate against ground truth");
    std::string est_file, gt_file, eval_obs, eval_out, csv_file;
    eval->add_option("estimate", est_file, "estimated scene/v1 file")->required();
    eval->add_option("truth", gt_file, "ground-truth scene/v1 file")->required();
    eval->add_option("obs", eval_obs, "obs/v1 file")->required();
    eval->add_option("--out", eval_out, "also write the metrics JSON here");
    eval->add_option("--csv", csv_file, "append a CSV row here");

    auto* render = app.add_subcommand("render", "render 2D overlays as SVG");
    std::string render_pg, render_obs, render_out;
    render->add_option("scene", render_pg, "scene/v1 JSON file")->required();
    render->add_option("obs", render_obs, "obs/v1 JSON file")->required();
    render->add_option("output", render_out, "output SVG path")->required();
    for (CLI::App* sub : {fit, synth, infer, eval, render}) sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    if (dump_defaults) {
        std::printf("%s", dump_default_config().c_str());
        return 0;
    }
    if (app.get_subcommands().empty()) {
        std::fprintf(stderr, "%s", app.help().c_str());
        return 2;
    }

    try {
        const RunConfig cfg = load_run_config(config_flag);
        const bool seed_given = seed_opt->count() > 0;
        if (fit->parsed()) return cmd_fit_hoi(samples_file, prior_out);
        if (synth->parsed())
            return cmd_synth(spec_file, out_dir, n_scenes, jobs, synth_priors, cfg, seed_given,
                             seed_override);
        if (infer->parsed())
            return cmd_infer(obs_file, infer_priors, infer_out, trace_file, phases_flag, cfg,
                             seed_given, seed_override);
        if (eval->parsed()) return cmd_eval(est_file, gt_file, eval_obs, eval_out, csv_file);
        if (render->parsed()) return cmd_render(render_pg, render_obs, render_out);
    } catch (const SchemaError& e) {
        std::fprintf(stderr, "input error: %s\n", e.what());
        return 2;
    } catch (const InvalidInputError& e) {
        std::fprintf(stderr, "input error: %s\n", e.what());
        return 2;
    } catch (const InvalidParameterError& e) {
        std::fprintf(stderr, "input error: %s\n", e.what());
        return 2;
    } catch (const InsufficientDataError& e) {
        std::fprintf(stderr, "insufficient data: %s\n", e.what());
        return 3;
    } catch (const GenerationError& e) {
        std::fprintf(stderr, "infeasible: %s\n", e.what());
        return 3;
    } catch (const Error& e) {
        std::fprintf(stderr, "runtime failure: %s\n", e.what());
        return 4;
    }
    return 2;
}
