#include "fc/eval.hpp"

#include <cmath>
#include <cstdio>
#include <iostream>
#include <limits>
#include <stdexcept>

#include "json.hpp"

#include "fc/capture.hpp"
#include "fc/hadamard.hpp"
#include "fc/parallel.hpp"
#include "fc/reconstruct.hpp"
#include "fc/rng.hpp"

namespace fc {

double mse(const FrameStack& a, const FrameStack& b) {
    if (!a.same_shape(b)) throw std::invalid_argument("MSE needs equally shaped stacks.");
    double acc = 0.0;
    for (size_t i = 0; i < a.data.size(); ++i) {
        const double d = a.data[i] - b.data[i];
        acc += d * d;
    }
    return acc / static_cast<double>(a.data.size());
}

namespace {

constexpr int kWin = 11;

const std::vector<double>& ssim_window() {
    static const std::vector<double> taps = [] {
        std::vector<double> t(kWin);
        double sum = 0.0;
        for (int i = 0; i < kWin; ++i) {
            const double d = i - (kWin - 1) / 2.0;
            t[i] = std::exp(-d * d / (2.0 * 1.5 * 1.5));
            sum += t[i];
        }
        for (double& v : t) v /= sum;
        return t;
    }();
    return taps;
}

// Separable valid-region convolution with the SSIM window: output dims
// shrink by kWin - 1 in each axis.
std::vector<double> window_filter(const std::vector<double>& img, int h, int w) {
    const auto& g = ssim_window();
    const int wo = w - kWin + 1, ho = h - kWin + 1;
    std::vector<double> rows(static_cast<size_t>(h) * wo);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < wo; ++x) {
            double acc = 0.0;
            for (int k = 0; k < kWin; ++k) acc += g[k] * img[static_cast<size_t>(y) * w + x + k];
            rows[static_cast<size_t>(y) * wo + x] = acc;
        }
    std::vector<double> out(static_cast<size_t>(ho) * wo);
    for (int y = 0; y < ho; ++y)
        for (int x = 0; x < wo; ++x) {
            double acc = 0.0;
            for (int k = 0; k < kWin; ++k) acc += g[k] * rows[static_cast<size_t>(y + k) * wo + x];
            out[static_cast<size_t>(y) * wo + x] = acc;
        }
    return out;
}

}  // namespace

double ssim(const Image& a, const Image& b) {
    if (!a.same_shape(b)) throw std::invalid_argument("SSIM needs equally shaped frames.");
    if (a.height < kWin || a.width < kWin)
        throw std::invalid_argument("Frame is smaller than the SSIM window.");
    const double c1 = 0.01 * 0.01, c2 = 0.03 * 0.03;  // dynamic range 1
    const size_t n = a.size();
    std::vector<double> aa(n), bb(n), ab(n);
    for (size_t i = 0; i < n; ++i) {
        aa[i] = a.data[i] * a.data[i];
        bb[i] = b.data[i] * b.data[i];
        ab[i] = a.data[i] * b.data[i];
    }
    const auto mu_a = window_filter(a.data, a.height, a.width);
    const auto mu_b = window_filter(b.data, a.height, a.width);
    const auto m_aa = window_filter(aa, a.height, a.width);
    const auto m_bb = window_filter(bb, a.height, a.width);
    const auto m_ab = window_filter(ab, a.height, a.width);
    double acc = 0.0;
    for (size_t i = 0; i < mu_a.size(); ++i) {
        const double va = m_aa[i] - mu_a[i] * mu_a[i];
        const double vb = m_bb[i] - mu_b[i] * mu_b[i];
        const double cov = m_ab[i] - mu_a[i] * mu_b[i];
        acc += ((2.0 * mu_a[i] * mu_b[i] + c1) * (2.0 * cov + c2)) /
               ((mu_a[i] * mu_a[i] + mu_b[i] * mu_b[i] + c1) * (va + vb + c2));
    }
    return acc / static_cast<double>(mu_a.size());
}

double ssim(const FrameStack& a, const FrameStack& b) {
    if (!a.same_shape(b)) throw std::invalid_argument("SSIM needs equally shaped stacks.");
    double acc = 0.0;
    for (int t = 0; t < a.frames; ++t) acc += ssim(a.frame(t), b.frame(t));
    return acc / a.frames;
}

double temporal_activity(const FrameStack& stack) {
    const size_t fs = stack.frame_size();
    double acc = 0.0;
    for (size_t p = 0; p < fs; ++p) {
        double mean = 0.0;
        for (int t = 0; t < stack.frames; ++t) mean += stack.data[t * fs + p];
        mean /= stack.frames;
        double var = 0.0;
        for (int t = 0; t < stack.frames; ++t) {
            const double d = stack.data[t * fs + p] - mean;
            var += d * d;
        }
        acc += var / stack.frames;
    }
    return acc / static_cast<double>(fs);
}

std::vector<Chip> extract_chips(const FrameStack& video, int count, uint64_t seed,
                                double activity_threshold) {
    if (count < 1) throw std::invalid_argument("Chip count must be positive.");
    if (video.frames < kChipFrames || video.height < kChipSize || video.width < kChipSize)
        throw std::invalid_argument("Source video is smaller than one chip.");

    Rng rng(seed);
    std::vector<Chip> chips;
    const int64_t max_attempts = 64LL * count;
    for (int64_t attempt = 0; attempt < max_attempts && static_cast<int>(chips.size()) < count;
         ++attempt) {
        Chip chip;
        chip.t0 = static_cast<int>(rng.next_below(video.frames - kChipFrames + 1));
        chip.y0 = static_cast<int>(rng.next_below(video.height - kChipSize + 1));
        chip.x0 = static_cast<int>(rng.next_below(video.width - kChipSize + 1));
        chip.frames = FrameStack(kChipFrames, kChipSize, kChipSize);
        for (int t = 0; t < kChipFrames; ++t)
            for (int y = 0; y < kChipSize; ++y)
                for (int x = 0; x < kChipSize; ++x)
                    chip.frames.at(t, y, x) = video.at(chip.t0 + t, chip.y0 + y, chip.x0 + x);
        chip.activity = temporal_activity(chip.frames);
        if (chip.activity < activity_threshold) continue;
        chip.id = static_cast<int>(chips.size());
        chips.push_back(std::move(chip));
    }
    if (static_cast<int>(chips.size()) < count)
        std::cerr << "warning: only " << chips.size() << " of " << count
                  << " requested chips passed the activity threshold\n";
    return chips;
}

const char* experiment_scheme_name(ExperimentScheme scheme) {
    switch (scheme) {
        case ExperimentScheme::FullCoded: return "fc";
        case ExperimentScheme::OneHot: return "one-hot";
        case ExperimentScheme::PseudoRandom: return "pseudo-random";
    }
    throw std::invalid_argument("Unknown experiment scheme.");
}

ExperimentScheme experiment_scheme_from_name(const std::string& name) {
    for (ExperimentScheme s : {ExperimentScheme::FullCoded, ExperimentScheme::OneHot,
                               ExperimentScheme::PseudoRandom})
        if (name == experiment_scheme_name(s)) return s;
    throw std::invalid_argument("Unknown experiment scheme name: " + name);
}

namespace {

SweepCell run_cell(const Chip& chip, ExperimentScheme scheme, double sigma,
                   const SweepConfig& config, const TmaLattice& tma, uint64_t cell_seed) {
    SweepCell cell;
    cell.scheme = experiment_scheme_name(scheme);
    cell.sigma = sigma;
    cell.chip_id = chip.id;
    cell.mse = std::numeric_limits<double>::quiet_NaN();
    cell.ssim = std::numeric_limits<double>::quiet_NaN();
    try {
        ReconstructionResult rec;
        switch (scheme) {
            case ExperimentScheme::FullCoded: {
                cell.demosaic = "fs";
                auto cap = degrade(encode_design1(chip.frames, tma), sigma, config.eta,
                                   config.gain, cell_seed);
                rec = recon_design1(cap, tma, DemosaicMethod::FrequencySelect, config.cutoff);
                break;
            }
            case ExperimentScheme::OneHot: {
                cell.demosaic = "bilinear";
                auto cap = degrade(
                    encode_single_binary(chip.frames, make_code(CodeKind::OneHot, 4), tma),
                    sigma, config.eta, config.gain, cell_seed);
                rec = recon_onehot(cap, tma, DemosaicMethod::Bilinear);
                break;
            }
            case ExperimentScheme::PseudoRandom: {
                cell.demosaic = "ridge";
                const auto code = make_code(CodeKind::PseudoRandom, 4,
                                            hash_mix(cell_seed, 0xc0deull),
                                            config.tile * config.tile);
                auto cap = degrade(encode_single_binary_tiled(chip.frames, code, config.tile),
                                   sigma, config.eta, config.gain, cell_seed);
                rec = recon_random_ls(cap);
                break;
            }
        }
        cell.mse = mse(rec.frames, chip.frames);
        cell.ssim = ssim(rec.frames, chip.frames);
    } catch (const std::exception& e) {
        cell.error = e.what();
    }
    return cell;
}

}  // namespace

std::vector<SweepCell> run_noise_sweep(const std::vector<Chip>& chips,
                                       const SweepConfig& config) {
    if (chips.empty()) throw std::invalid_argument("Sweep needs at least one chip.");
    if (config.schemes.empty() || config.sigmas.empty())
        throw std::invalid_argument("Sweep needs schemes and noise levels.");
    for (const Chip& chip : chips)
        if (chip.frames.frames != kChipFrames || chip.frames.height != kChipSize ||
            chip.frames.width != kChipSize)
            throw std::invalid_argument("Chips must be 16x64x64.");

    const auto tma = build_tma(config.gen, kChipSize, kChipSize);
    const int64_t per_scheme = static_cast<int64_t>(config.sigmas.size()) * chips.size();
    const int64_t total = static_cast<int64_t>(config.schemes.size()) * per_scheme;
    std::vector<SweepCell> cells(total);
    parallel_for(0, total, [&](int64_t i) {
        const int scheme_idx = static_cast<int>(i / per_scheme);
        const int sigma_idx = static_cast<int>((i % per_scheme) / chips.size());
        const int chip_idx = static_cast<int>(i % chips.size());
        const Chip& chip = chips[chip_idx];
        const uint64_t cell_seed =
            hash_mix(config.seed, static_cast<uint64_t>(chip.id),
                     static_cast<uint64_t>(scheme_idx), static_cast<uint64_t>(sigma_idx));
        cells[i] = run_cell(chip, config.schemes[scheme_idx], config.sigmas[sigma_idx], config,
                            tma, cell_seed);
    });
    return cells;
}

std::vector<SweepAggregate> aggregate_sweep(const std::vector<SweepCell>& cells) {
    std::vector<SweepAggregate> groups;
    for (const SweepCell& cell : cells) {
        SweepAggregate* g = nullptr;
        for (auto& existing : groups)
            if (existing.scheme == cell.scheme && existing.sigma == cell.sigma) {
                g = &existing;
                break;
            }
        if (!g) {
            groups.push_back({cell.scheme, cell.sigma, 0, 0, 0.0, 0.0});
            g = &groups.back();
        }
        ++g->cells;
        if (!cell.error.empty()) {
            ++g->errors;
        } else {
            g->mean_mse += cell.mse;
            g->mean_ssim += cell.ssim;
        }
    }
    for (auto& g : groups) {
        const int ok = g.cells - g.errors;
        if (ok > 0) {
            g.mean_mse /= ok;
            g.mean_ssim /= ok;
        }
    }
    return groups;
}

namespace {

std::string format_double(const char* fmt, double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), fmt, v);
    return buf;
}

}  // namespace

std::string sweep_csv(const std::vector<SweepCell>& cells) {
    std::string out = "scheme,sigma,demosaic,chip_id,mse,ssim\n";
    for (const SweepCell& c : cells) {
        out += c.scheme;
        out += ',';
        out += format_double("%g", c.sigma);
        out += ',';
        out += c.demosaic;
        out += ',';
        out += std::to_string(c.chip_id);
        out += ',';
        out += format_double("%.9g", c.mse);
        out += ',';
        out += format_double("%.9g", c.ssim);
        out += '\n';
    }
    return out;
}

std::string sweep_summary_json(const std::vector<SweepCell>& cells) {
    const auto groups = aggregate_sweep(cells);
    nlohmann::ordered_json doc;
    doc["cells"] = cells.size();
    int errors = 0;
    for (const auto& c : cells) errors += c.error.empty() ? 0 : 1;
    doc["errors"] = errors;
    doc["aggregates"] = nlohmann::ordered_json::array();
    for (const auto& g : groups) {
        nlohmann::ordered_json row;
        row["scheme"] = g.scheme;
        row["sigma"] = g.sigma;
        row["cells"] = g.cells;
        row["errors"] = g.errors;
        row["mean_mse"] = g.mean_mse;
        row["mean_ssim"] = g.mean_ssim;
        doc["aggregates"].push_back(row);
    }
    return doc.dump(2) + "\n";
}

}  // namespace fc
