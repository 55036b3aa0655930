#include <cmath>
#include <cstdio>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "fc/analysis.hpp"
#include "fc/capture.hpp"
#include "fc/crosstalk.hpp"
#include "fc/eval.hpp"
#include "fc/hadamard.hpp"
#include "fc/io.hpp"
#include "fc/lattice.hpp"
#include "fc/parallel.hpp"
#include "fc/reconstruct.hpp"
#include "fc/rng.hpp"
#include "fc/synth.hpp"

namespace {

using namespace fc;
namespace fsys = std::filesystem;

std::string condition_field(double c) {
    if (std::isinf(c)) return "inf";
    char buf[40];
    if (std::abs(c - std::round(c)) < 1e-9)
        std::snprintf(buf, sizeof buf, "%.1f", c);
    else
        std::snprintf(buf, sizeof buf, "%.4f", c);
    return buf;
}

std::string efficiency_field(double e) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.4g", e);
    return buf;
}

GeneratorMatrix parse_generator(const std::string& text) {
    GeneratorMatrix gen;
    char extra;
    if (std::sscanf(text.c_str(), "%d,%d,%d,%d%c", &gen.m[0], &gen.m[1], &gen.m[2], &gen.m[3],
                    &extra) != 4)
        throw std::invalid_argument("--gen expects four integers a,b,c,d");
    return gen;
}

// Lattice choice: explicit matrix wins, then a searched |det| target, then
// the stock 15-coset generator.
GeneratorMatrix resolve_generator(const RunConfig& cfg, int bound) {
    if (cfg.generator) return GeneratorMatrix{*cfg.generator};
    if (cfg.lattice_n) return search_generator(*cfg.lattice_n, bound);
    return GeneratorMatrix{{3, 4, 3, -1}};
}

void ensure_parent_dir(const std::string& path) {
    const fsys::path parent = fsys::path(path).parent_path();
    if (!parent.empty()) fsys::create_directories(parent);
}

int cmd_codes(const RunConfig& cfg, int survey, const std::string& out) {
    std::string csv = "scheme,condition,efficiency\n";
    for (Scheme scheme : {Scheme::OneHot, Scheme::PseudoRandom, Scheme::PositiveHadamard,
                          Scheme::SignedHadamard, Scheme::Design2}) {
        const auto rep =
            analyze_scheme(scheme, cfg.m, cfg.seed, scheme == Scheme::PseudoRandom ? survey : 0);
        double eff = light_efficiency(scheme, cfg.m, cfg.split);
        csv += rep.name + "," + condition_field(rep.condition) + "," + efficiency_field(eff) + "\n";
    }
    std::fputs(csv.c_str(), stdout);
    if (!out.empty()) {
        ensure_parent_dir(out);
        write_file_atomic(out, csv);
    }
    return 0;
}

int cmd_lattice(const RunConfig& cfg, int bound, const std::string& out_base) {
    if (!cfg.generator && !cfg.lattice_n)
        throw std::invalid_argument("lattice needs --gen or --n");
    const GeneratorMatrix gen = resolve_generator(cfg, bound);
    const auto offs = cosets(gen);
    const auto waves = carriers(gen);
    std::printf("generator: [[%d, %d], [%d, %d]]\n", gen.a(), gen.b(), gen.c(), gen.d());
    std::printf("det: %ld\n", gen.det());
    std::printf("cosets: %d\n", gen.coset_count());
    std::printf("score: %.6f\n", hexagonality_score(gen));
    if (out_base.empty()) return 0;
    ensure_parent_dir(out_base);

    std::string coset_csv = "index,x,y\n";
    for (size_t i = 0; i < offs.size(); ++i)
        coset_csv += std::to_string(i) + "," + std::to_string(offs[i][0]) + "," +
                     std::to_string(offs[i][1]) + "\n";
    write_file_atomic(out_base + "-cosets.csv", coset_csv);

    std::string wave_csv = "index,num_x,num_y,den,freq_x,freq_y\n";
    for (size_t i = 0; i < waves.size(); ++i) {
        char buf[96];
        std::snprintf(buf, sizeof buf, "%zu,%ld,%ld,%ld,%.10g,%.10g\n", i, waves[i].num_x,
                      waves[i].num_y, waves[i].den, waves[i].x(), waves[i].y());
        wave_csv += buf;
    }
    write_file_atomic(out_base + "-carriers.csv", wave_csv);

    // Frequency plan: carriers plotted over [-pi, pi)^2, DC dimmer.
    Image plan(129, 129, 0.0);
    for (int i = 0; i < 129; ++i) plan.at(64, i) = plan.at(i, 64) = 0.25;
    constexpr double kPi = 3.14159265358979323846;
    for (const Carrier& c : waves) {
        const int px = static_cast<int>(std::lround((c.x() + kPi) / (2 * kPi) * 128));
        const int py = static_cast<int>(std::lround((c.y() + kPi) / (2 * kPi) * 128));
        for (int dy = -1; dy <= 1; ++dy)
            for (int dx = -1; dx <= 1; ++dx) {
                const int y = py + dy, x = px + dx;
                if (y >= 0 && y < 129 && x >= 0 && x < 129)
                    plan.at(y, x) = c.is_zero() ? 0.6 : 1.0;
            }
    }
    write_pgm(out_base + "-plan.pgm", plan);
    std::printf("wrote %s-cosets.csv, %s-carriers.csv, %s-plan.pgm\n", out_base.c_str(),
                out_base.c_str(), out_base.c_str());
    return 0;
}

struct SyntheticFlags {
    bool enabled = false;
    int frames = 16;
    int height = 192;
    int width = 192;
};

FrameStack load_source(const RunConfig& cfg, const SyntheticFlags& synth) {
    if (cfg.input && synth.enabled)
        throw std::invalid_argument("Pass either --input or --synthetic, not both.");
    if (cfg.input) return read_frame_stack(*cfg.input);
    if (!synth.enabled) throw std::invalid_argument("encode needs --input or --synthetic");
    SceneParams params;
    params.frames = synth.frames;
    params.height = synth.height;
    params.width = synth.width;
    params.seed = hash_mix(cfg.seed, 0x5ce11e);
    return synthetic_scene(params);
}

int cmd_encode(const RunConfig& cfg, const SyntheticFlags& synth, int bound,
               const std::string& truth_out) {
    if (!cfg.output) throw std::invalid_argument("encode needs --output <base>");
    const FrameStack stack = load_source(cfg, synth);
    if (stack.frames != (1 << cfg.m))
        throw std::invalid_argument("Input carries " + std::to_string(stack.frames) +
                                    " frames but --m " + std::to_string(cfg.m) + " expects " +
                                    std::to_string(1 << cfg.m) + ".");
    const GeneratorMatrix gen = resolve_generator(cfg, bound);
    CodedCapture capture;
    if (cfg.design == "design1") {
        capture = encode_design1(stack, build_tma(gen, stack.height, stack.width));
    } else if (cfg.design == "design1-full") {
        capture = encode_design1_full(stack);
    } else if (cfg.design == "design2") {
        capture = encode_design2(stack, build_tma(gen, stack.height, stack.width), cfg.split);
    } else if (cfg.design == "one-hot") {
        capture = encode_single_binary(stack, make_code(CodeKind::OneHot, cfg.m),
                                       build_tma(gen, stack.height, stack.width));
    } else if (cfg.design == "positive-hadamard") {
        capture = encode_single_binary(stack, make_code(CodeKind::PositiveHadamard, cfg.m),
                                       build_tma(gen, stack.height, stack.width));
    } else if (cfg.design == "pseudo-random") {
        const auto code = make_code(CodeKind::PseudoRandom, cfg.m, hash_mix(cfg.seed, 0xc0de),
                                    cfg.tile * cfg.tile);
        capture = encode_single_binary_tiled(stack, code, cfg.tile);
    } else {
        throw std::invalid_argument("Unknown design: " + cfg.design);
    }
    if (cfg.sigma > 0.0 || cfg.eta != 0.0 || cfg.gain != 1.0)
        capture = degrade(capture, cfg.sigma, cfg.eta, cfg.gain, hash_mix(cfg.seed, 0xdeb));
    ensure_parent_dir(*cfg.output);
    save_capture(*cfg.output, capture, gen);
    if (!truth_out.empty()) {
        ensure_parent_dir(truth_out);
        write_frame_stack(truth_out, stack);
    }
    std::printf("wrote %s.fstk + %s.json (%s, %zu images, %dx%d)\n", cfg.output->c_str(),
                cfg.output->c_str(), cfg.design.c_str(), capture.images.size(), stack.height,
                stack.width);
    return 0;
}

int cmd_decode(const RunConfig& cfg, double lambda) {
    if (!cfg.input) throw std::invalid_argument("decode needs --input <base>");
    if (!cfg.output) throw std::invalid_argument("decode needs --output <file.fstk>");
    const CaptureBundle bundle = load_capture(*cfg.input);
    const CodedCapture& cap = bundle.capture;

    DemosaicMethod method;
    if (cfg.demosaic == "bilinear")
        method = DemosaicMethod::Bilinear;
    else if (cfg.demosaic == "fs")
        method = DemosaicMethod::FrequencySelect;
    else
        throw std::invalid_argument("--demosaic must be bilinear or fs");

    const Image& first = cap.images.at(0);
    ReconstructionResult result;
    if (cap.design == CaptureDesign::Design1) {
        result = recon_design1(cap, build_tma(bundle.gen, first.height, first.width), method,
                               cfg.cutoff);
    } else if (cap.design == CaptureDesign::Design2) {
        result = recon_design2(cap, build_tma(bundle.gen, first.height, first.width), method,
                               cfg.cutoff);
    } else if (cap.tile > 0) {
        result = recon_random_ls(cap, lambda);
    } else if (cap.code.kind == CodeKind::OneHot) {
        result = recon_onehot(cap, build_tma(bundle.gen, first.height, first.width), method,
                              cfg.cutoff);
    } else {
        throw std::invalid_argument("No decoder for this capture layout.");
    }

    ensure_parent_dir(*cfg.output);
    write_frame_stack(*cfg.output, result.frames);
    nlohmann::ordered_json diag;
    diag["method"] = result.method;
    diag["mix_condition"] = result.mix_condition;
    diag["imag_rms"] = result.imag_rms;
    diag["frame0_offset_suspect"] = result.frame0_offset_suspect;
    if (!result.ridge_condition.empty()) diag["ridge_condition"] = result.ridge_condition;
    const std::string diag_path = fsys::path(*cfg.output).replace_extension("json").string();
    write_file_atomic(diag_path, diag.dump(2) + "\n");
    std::printf("wrote %s + %s (%s)\n", cfg.output->c_str(), diag_path.c_str(),
                result.method.c_str());
    return 0;
}

int cmd_experiment(const RunConfig& cfg, int bound) {
    FrameStack video;
    if (cfg.corpus) {
        video = read_frame_stack(*cfg.corpus);
    } else {
        SceneParams params;
        params.frames = 48;
        params.height = 256;
        params.width = 256;
        params.seed = hash_mix(cfg.seed, 0x5eed);
        video = synthetic_scene(params);
    }
    const auto chips = extract_chips(video, cfg.chips, hash_mix(cfg.seed, 0xc417));
    if (chips.empty()) throw std::runtime_error("No active chips found in the corpus.");

    SweepConfig sweep;
    sweep.schemes.clear();
    for (const std::string& name : cfg.schemes)
        sweep.schemes.push_back(experiment_scheme_from_name(name));
    sweep.sigmas = cfg.sigmas;
    sweep.gen = resolve_generator(cfg, bound);
    sweep.cutoff = cfg.cutoff;
    sweep.tile = cfg.tile;
    sweep.gain = cfg.gain;
    sweep.eta = cfg.eta;
    sweep.seed = cfg.seed;
    const auto cells = run_noise_sweep(chips, sweep);

    const std::string out_dir = cfg.output.value_or("experiment-out");
    fsys::create_directories(out_dir);
    write_file_atomic((fsys::path(out_dir) / "results.csv").string(), sweep_csv(cells));
    write_file_atomic((fsys::path(out_dir) / "summary.json").string(),
                      sweep_summary_json(cells));

    for (const auto& agg : aggregate_sweep(cells))
        std::printf("%-14s sigma=%-9g mse=%-12.6g ssim=%.4f (chips=%d, errors=%d)\n",
                    agg.scheme.c_str(), agg.sigma, agg.mean_mse, agg.mean_ssim, agg.cells,
                    agg.errors);
    std::printf("wrote %s/results.csv + %s/summary.json (%zu chips)\n", out_dir.c_str(),
                out_dir.c_str(), chips.size());
    return 0;
}

int cmd_crosstalk(const RunConfig& cfg, int rows, int cols, double oversample, double sigma_psf,
                  const std::string& layout_name, double tol, int max_iter, bool estimate_cond,
                  const std::string& save_path) {
    if (cols <= 0) cols = rows;
    const int cam_r = static_cast<int>(std::lround(rows * oversample));
    const int cam_c = static_cast<int>(std::lround(cols * oversample));
    const auto map = build_optical_map(rows, cols, cam_r, cam_c, sigma_psf,
                                       mirror_layout_from_name(layout_name));

    Image truth(rows, cols);
    if (cfg.input) {
        const FrameStack in = read_frame_stack(*cfg.input);
        if (in.frames != 1 || in.height != rows || in.width != cols)
            throw std::invalid_argument("--input must hold one frame of the mirror size.");
        truth = in.frame(0);
    } else {
        Rng rng(hash_mix(cfg.seed, 0xeee));
        for (double& v : truth.data) v = rng.next_double();
    }

    const Image camera = forward_capture(map, truth);
    const auto solution = correct_crosstalk(map, camera, tol, max_iter);
    double num = 0.0, den = 0.0;
    for (size_t i = 0; i < truth.data.size(); ++i) {
        const double d = solution.mirrors.data[i] - truth.data[i];
        num += d * d;
        den += truth.data[i] * truth.data[i];
    }
    const double rel_error = den > 0 ? std::sqrt(num / den) : std::sqrt(num);

    nlohmann::ordered_json report;
    report["mirror_rows"] = rows;
    report["mirror_cols"] = cols;
    report["camera_rows"] = cam_r;
    report["camera_cols"] = cam_c;
    report["layout"] = layout_name;
    report["sigma_psf"] = sigma_psf;
    report["iterations"] = solution.iterations;
    report["residual"] = solution.residual;
    report["relative_error"] = rel_error;
    if (estimate_cond) report["normal_condition"] = normal_condition_estimate(map);
    const std::string text = report.dump(2) + "\n";
    std::fputs(text.c_str(), stdout);
    if (cfg.output) {
        ensure_parent_dir(*cfg.output);
        write_file_atomic(*cfg.output, text);
    }
    if (!save_path.empty()) {
        FrameStack out(1, rows, cols);
        out.data = solution.mirrors.data;
        ensure_parent_dir(save_path);
        write_frame_stack(save_path, out);
    }
    return 0;
}

int cmd_import(const RunConfig& cfg, const std::string& dir) {
    if (!cfg.output) throw std::invalid_argument("import needs --output <file.fstk>");
    const FrameStack stack = read_pgm_directory(dir);
    ensure_parent_dir(*cfg.output);
    write_frame_stack(*cfg.output, stack);
    std::printf("imported %d frames of %dx%d into %s\n", stack.frames, stack.height, stack.width,
                cfg.output->c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    RunConfig cfg;
    // Load --config before CLI parsing so its values act as flag defaults
    // and explicit flags override them.
    for (int i = 1; i + 1 < argc; ++i) {
        if (std::string(argv[i]) == "--config") {
            try {
                cfg = load_run_config(argv[i + 1]);
            } catch (const std::exception& e) {
                std::fprintf(stderr, "error: %s\n", e.what());
                return 2;
            }
        }
    }

    CLI::App app{"Sign-coded exposure imaging toolkit"};
    app.require_subcommand(1);
    std::string config_path;
    app.add_option("--config", config_path, "JSON config file");
    app.add_option("--seed", cfg.seed, "master random seed");
    int threads = cfg.threads.value_or(0);
    app.add_option("--threads", threads, "worker threads (0 = hardware default)");

    std::string gen_text, out_file, out_base, truth_out, import_dir, layout = "quincunx";
    std::string save_recovered;
    int survey = 0, bound = 9, n_target = 0;
    double lambda = -1.0, oversample = 2.5, sigma_psf = 1.0, tol = 1e-8;
    int mirror_rows = 64, mirror_cols = 0, max_iter = 500;
    bool estimate_cond = false;
    SyntheticFlags synth;

    const auto add_lattice_flags = [&](CLI::App* sub) {
        sub->add_option("--gen", gen_text, "lattice generator a,b,c,d");
        sub->add_option("--n", n_target, "search for |det| = n");
        sub->add_option("--bound", bound, "search entry bound");
    };

    auto* codes = app.add_subcommand("codes", "print the conditioning/efficiency table");
    codes->fallthrough();
    codes->add_option("--m", cfg.m, "log2 of the frame count");
    codes->add_option("--survey", survey, "random-code survey trials");
    codes->add_option("--split", cfg.split, "beamsplitter DC fraction");
    codes->add_option("--out", out_file, "also write the CSV here");

    auto* lattice = app.add_subcommand("lattice", "inspect or search sampling lattices");
    lattice->fallthrough();
    add_lattice_flags(lattice);
    lattice->add_option("--out", out_base, "write <base>-cosets.csv/-carriers.csv/-plan.pgm");

    auto* encode = app.add_subcommand("encode", "simulate a coded capture");
    encode->fallthrough();
    add_lattice_flags(encode);
    encode->add_option("--input", cfg.input, "source frame stack (.fstk)");
    encode->add_flag("--synthetic", synth.enabled, "render a synthetic source");
    encode->add_option("--frames", synth.frames, "synthetic frame count");
    encode->add_option("--height", synth.height, "synthetic height");
    encode->add_option("--width", synth.width, "synthetic width");
    encode->add_option("--m", cfg.m, "log2 of the frame count");
    encode->add_option("--design", cfg.design,
                       "design1 | design1-full | design2 | one-hot | positive-hadamard | "
                       "pseudo-random");
    encode->add_option("--split", cfg.split, "beamsplitter DC fraction");
    encode->add_option("--tile", cfg.tile, "pseudo-random tile pitch");
    encode->add_option("--sigma", cfg.sigma, "sensor noise level");
    encode->add_option("--eta", cfg.eta, "sensor zero offset");
    encode->add_option("--gain", cfg.gain, "sensor gain");
    encode->add_option("--output", cfg.output, "capture bundle base path");
    encode->add_option("--truth", truth_out, "also save the source stack here");

    auto* decode = app.add_subcommand("decode", "reconstruct frames from a capture bundle");
    decode->fallthrough();
    decode->add_option("--input", cfg.input, "capture bundle base path");
    decode->add_option("--output", cfg.output, "reconstructed stack (.fstk)");
    decode->add_option("--demosaic", cfg.demosaic, "bilinear | fs");
    decode->add_option("--cutoff", cfg.cutoff, "frequency-selection passband fraction");
    decode->add_option("--lambda", lambda, "ridge weight (negative = default)");

    auto* experiment = app.add_subcommand("experiment", "run a chip noise sweep");
    experiment->fallthrough();
    add_lattice_flags(experiment);
    experiment->add_option("--corpus", cfg.corpus, "corpus video (.fstk); default synthetic");
    experiment->add_option("--chips", cfg.chips, "number of evaluation chips");
    experiment->add_option("--output", cfg.output, "output directory");

    auto* crosstalk = app.add_subcommand("crosstalk", "simulate and invert mirror crosstalk");
    crosstalk->fallthrough();
    crosstalk->add_option("--rows", mirror_rows, "mirror rows");
    crosstalk->add_option("--cols", mirror_cols, "mirror cols (default rows)");
    crosstalk->add_option("--oversample", oversample, "camera pixels per mirror pitch");
    crosstalk->add_option("--sigma-psf", sigma_psf, "Gaussian blur width in camera pixels");
    crosstalk->add_option("--layout", layout, "quincunx | grid");
    crosstalk->add_option("--tol", tol, "relative normal-residual tolerance");
    crosstalk->add_option("--max-iter", max_iter, "iteration cap");
    crosstalk->add_flag("--estimate-cond", estimate_cond, "estimate normal-system conditioning");
    crosstalk->add_option("--input", cfg.input, "mirror image (.fstk, one frame)");
    crosstalk->add_option("--output", cfg.output, "write the JSON report here");
    crosstalk->add_option("--save-recovered", save_recovered, "write recovered mirrors (.fstk)");

    auto* import = app.add_subcommand("import", "convert a directory of graymaps");
    import->fallthrough();
    import->add_option("--dir", import_dir, "directory of .pgm frames")->required();
    import->add_option("--output", cfg.output, "output stack (.fstk)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        set_thread_count(threads);
        if (!gen_text.empty()) cfg.generator = parse_generator(gen_text).m;
        if (n_target > 0) {
            if (cfg.generator)
                throw std::invalid_argument("Pass either --gen or --n, not both.");
            cfg.lattice_n = n_target;
        }
        if (codes->parsed()) return cmd_codes(cfg, survey, out_file);
        if (lattice->parsed()) return cmd_lattice(cfg, bound, out_base);
        if (encode->parsed()) return cmd_encode(cfg, synth, bound, truth_out);
        if (decode->parsed()) return cmd_decode(cfg, lambda);
        if (experiment->parsed()) return cmd_experiment(cfg, bound);
        if (crosstalk->parsed())
            return cmd_crosstalk(cfg, mirror_rows, mirror_cols, oversample, sigma_psf, layout,
                                 tol, max_iter, estimate_cond, save_recovered);
        if (import->parsed()) return cmd_import(cfg, import_dir);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
