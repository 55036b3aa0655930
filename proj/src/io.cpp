#include "fc/io.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "json.hpp"

namespace fc {

namespace {

constexpr char kMagic[4] = {'F', 'S', 'T', 'K'};
constexpr uint16_t kVersion = 1;
constexpr uint16_t kFloat32 = 1;
constexpr size_t kHeaderBytes = 4 + 2 + 4 + 4 + 4 + 2;

void put_u16(std::string& out, uint16_t v) {
    out.push_back(static_cast<char>(v & 0xff));
    out.push_back(static_cast<char>(v >> 8));
}

void put_u32(std::string& out, uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

uint16_t get_u16(const std::string& s, size_t pos) {
    const auto b = [&](size_t i) { return static_cast<uint32_t>(static_cast<uint8_t>(s[pos + i])); };
    return static_cast<uint16_t>(b(0) | (b(1) << 8));
}

uint32_t get_u32(const std::string& s, size_t pos) {
    const auto b = [&](size_t i) { return static_cast<uint32_t>(static_cast<uint8_t>(s[pos + i])); };
    return b(0) | (b(1) << 8) | (b(2) << 16) | (b(3) << 24);
}

const char* design_name(CaptureDesign design) {
    switch (design) {
        case CaptureDesign::Design1: return "design1";
        case CaptureDesign::Design2: return "design2";
        case CaptureDesign::SingleBinary: return "single-binary";
    }
    return "unknown";
}

CaptureDesign design_from_name(const std::string& name) {
    for (CaptureDesign d :
         {CaptureDesign::Design1, CaptureDesign::Design2, CaptureDesign::SingleBinary})
        if (name == design_name(d)) return d;
    throw std::runtime_error("Unknown capture design: " + name);
}

}  // namespace

std::string encode_frame_stack(const FrameStack& stack) {
    std::string out;
    out.reserve(kHeaderBytes + stack.data.size() * 4);
    out.append(kMagic, 4);
    put_u16(out, kVersion);
    put_u32(out, static_cast<uint32_t>(stack.frames));
    put_u32(out, static_cast<uint32_t>(stack.height));
    put_u32(out, static_cast<uint32_t>(stack.width));
    put_u16(out, kFloat32);
    for (double v : stack.data) {
        if (!std::isfinite(v)) throw std::invalid_argument("Frame stack holds non-finite values.");
        put_u32(out, std::bit_cast<uint32_t>(static_cast<float>(v)));
    }
    return out;
}

FrameStack decode_frame_stack(const std::string& bytes) {
    if (bytes.size() < kHeaderBytes || bytes.compare(0, 4, kMagic, 4) != 0)
        throw std::runtime_error("Not a frame-stack file.");
    if (get_u16(bytes, 4) != kVersion)
        throw std::runtime_error("Unsupported frame-stack version.");
    const uint64_t t = get_u32(bytes, 6);
    const uint64_t h = get_u32(bytes, 10);
    const uint64_t w = get_u32(bytes, 14);
    if (get_u16(bytes, 18) != kFloat32)
        throw std::runtime_error("Unsupported frame-stack sample type.");
    if (t == 0 || h == 0 || w == 0) throw std::runtime_error("Frame-stack header declares empty dimensions.");
    const uint64_t count = t * h * w;
    if (t > (1u << 20) || h > (1u << 20) || w > (1u << 20) || count > (1ull << 33))
        throw std::runtime_error("Frame-stack header declares implausible dimensions.");
    if (bytes.size() != kHeaderBytes + count * 4)
        throw std::runtime_error("Frame-stack payload size mismatch.");
    FrameStack stack(static_cast<int>(t), static_cast<int>(h), static_cast<int>(w));
    for (uint64_t i = 0; i < count; ++i) {
        const float f = std::bit_cast<float>(get_u32(bytes, kHeaderBytes + i * 4));
        if (!std::isfinite(f)) throw std::runtime_error("Frame stack holds non-finite samples.");
        stack.data[i] = f;
    }
    return stack;
}

void write_frame_stack(const std::string& path, const FrameStack& stack) {
    write_file_atomic(path, encode_frame_stack(stack));
}

FrameStack read_frame_stack(const std::string& path) {
    try {
        return decode_frame_stack(read_file(path));
    } catch (const std::runtime_error& e) {
        throw std::runtime_error(path + ": " + e.what());
    }
}

void write_file_atomic(const std::string& path, const std::string& bytes) {
    namespace fsys = std::filesystem;
    const fsys::path target(path);
    fsys::path tmp(target);
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("Cannot open " + tmp.string() + " for writing.");
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        out.flush();
        if (!out) {
            std::error_code ec;
            fsys::remove(tmp, ec);
            throw std::runtime_error("Write failed for " + tmp.string());
        }
    }
    std::error_code ec;
    fsys::rename(tmp, target, ec);
    if (ec) {
        std::error_code rc;
        fsys::remove(tmp, rc);
        throw std::runtime_error("Cannot move " + tmp.string() + " into place: " + ec.message());
    }
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("Cannot read " + path);
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad()) throw std::runtime_error("Read failed for " + path);
    return bytes;
}

namespace {

long pgm_token(const std::string& s, size_t& pos, const std::string& path) {
    while (pos < s.size()) {
        const char ch = s[pos];
        if (ch == ' ' || ch == '\t' || ch == '\r' || ch == '\n') {
            ++pos;
        } else if (ch == '#') {
            while (pos < s.size() && s[pos] != '\n') ++pos;
        } else {
            break;
        }
    }
    long value = 0;
    size_t digits = 0;
    while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos])) && digits < 9) {
        value = value * 10 + (s[pos] - '0');
        ++pos;
        ++digits;
    }
    if (digits == 0) throw std::runtime_error(path + ": malformed graymap header.");
    return value;
}

}  // namespace

Image read_pgm(const std::string& path) {
    const std::string s = read_file(path);
    if (s.size() < 2 || s[0] != 'P' || s[1] != '5')
        throw std::runtime_error(path + ": not a binary graymap.");
    size_t pos = 2;
    const long w = pgm_token(s, pos, path);
    const long h = pgm_token(s, pos, path);
    const long maxval = pgm_token(s, pos, path);
    if (w <= 0 || h <= 0 || maxval <= 0 || maxval > 65535)
        throw std::runtime_error(path + ": graymap header out of range.");
    if (pos >= s.size() || !(s[pos] == ' ' || s[pos] == '\t' || s[pos] == '\r' || s[pos] == '\n'))
        throw std::runtime_error(path + ": malformed graymap header.");
    ++pos;
    const int sample_bytes = maxval > 255 ? 2 : 1;
    const size_t need = static_cast<size_t>(w) * h * sample_bytes;
    if (s.size() - pos != need) throw std::runtime_error(path + ": graymap payload size mismatch.");
    Image img(static_cast<int>(h), static_cast<int>(w));
    for (size_t i = 0; i < static_cast<size_t>(w) * h; ++i) {
        long raw;
        if (sample_bytes == 1) {
            raw = static_cast<uint8_t>(s[pos + i]);
        } else {
            // Two-byte samples are big-endian in this format.
            raw = (static_cast<long>(static_cast<uint8_t>(s[pos + 2 * i])) << 8) |
                  static_cast<uint8_t>(s[pos + 2 * i + 1]);
        }
        if (raw > maxval) throw std::runtime_error(path + ": graymap sample exceeds maxval.");
        img.data[i] = static_cast<double>(raw) / maxval;
    }
    return img;
}

void write_pgm(const std::string& path, const Image& image, int maxval) {
    if (maxval < 1 || maxval > 65535)
        throw std::invalid_argument("Graymap maxval must lie in [1, 65535].");
    std::string out = "P5\n" + std::to_string(image.width) + " " + std::to_string(image.height) +
                      "\n" + std::to_string(maxval) + "\n";
    for (double v : image.data) {
        if (!std::isfinite(v)) throw std::invalid_argument("Image holds non-finite values.");
        const long q = std::lround(std::clamp(v, 0.0, 1.0) * maxval);
        if (maxval > 255) out.push_back(static_cast<char>((q >> 8) & 0xff));
        out.push_back(static_cast<char>(q & 0xff));
    }
    write_file_atomic(path, out);
}

FrameStack read_pgm_directory(const std::string& dir) {
    namespace fsys = std::filesystem;
    std::vector<std::string> paths;
    std::error_code ec;
    for (const auto& entry : fsys::directory_iterator(dir, ec))
        if (entry.is_regular_file() && entry.path().extension() == ".pgm")
            paths.push_back(entry.path().string());
    if (ec) throw std::runtime_error("Cannot list " + dir + ": " + ec.message());
    if (paths.empty()) throw std::runtime_error("No .pgm files under " + dir);
    std::sort(paths.begin(), paths.end());
    const Image first = read_pgm(paths[0]);
    FrameStack stack(static_cast<int>(paths.size()), first.height, first.width);
    std::copy(first.data.begin(), first.data.end(), stack.data.begin());
    for (size_t t = 1; t < paths.size(); ++t) {
        const Image frame = read_pgm(paths[t]);
        if (frame.height != first.height || frame.width != first.width)
            throw std::runtime_error(paths[t] + ": frame size differs from the first frame.");
        std::copy(frame.data.begin(), frame.data.end(),
                  stack.data.begin() + static_cast<ptrdiff_t>(t * stack.frame_size()));
    }
    return stack;
}

void save_capture(const std::string& base, const CodedCapture& capture,
                  const GeneratorMatrix& gen) {
    if (capture.images.empty()) throw std::invalid_argument("Capture holds no images.");
    const Image& first = capture.images[0];
    FrameStack pack(static_cast<int>(capture.images.size()), first.height, first.width);
    for (size_t i = 0; i < capture.images.size(); ++i) {
        const Image& img = capture.images[i];
        if (img.height != first.height || img.width != first.width)
            throw std::invalid_argument("Capture images disagree on size.");
        std::copy(img.data.begin(), img.data.end(),
                  pack.data.begin() + static_cast<ptrdiff_t>(i * pack.frame_size()));
    }
    nlohmann::ordered_json meta;
    meta["design"] = design_name(capture.design);
    meta["full_code"] = capture.full_code;
    meta["m"] = capture.order_exp;
    meta["split"] = capture.split;
    meta["tile"] = capture.tile;
    meta["gains"] = capture.gains;
    meta["noise_sigma"] = capture.noise_sigma;
    meta["offset_eta"] = capture.offset_eta;
    meta["noise_seed"] = capture.noise_seed;
    meta["degraded"] = capture.degraded;
    meta["generator"] = gen.m;
    if (capture.design == CaptureDesign::SingleBinary)
        meta["code"] = {{"kind", code_kind_name(capture.code.kind)},
                        {"m", capture.code.order_exp},
                        {"rows", capture.code.num_rows},
                        {"seed", capture.code.seed}};
    write_frame_stack(base + ".fstk", pack);
    write_file_atomic(base + ".json", meta.dump(2) + "\n");
}

CaptureBundle load_capture(const std::string& base) {
    const FrameStack pack = read_frame_stack(base + ".fstk");
    nlohmann::json meta;
    try {
        meta = nlohmann::json::parse(read_file(base + ".json"));
        CaptureBundle bundle;
        CodedCapture& cap = bundle.capture;
        cap.design = design_from_name(meta.at("design").get<std::string>());
        cap.full_code = meta.at("full_code").get<bool>();
        cap.order_exp = meta.at("m").get<int>();
        cap.split = meta.at("split").get<double>();
        cap.tile = meta.at("tile").get<int>();
        cap.gains = meta.at("gains").get<std::vector<double>>();
        cap.noise_sigma = meta.at("noise_sigma").get<double>();
        cap.offset_eta = meta.at("offset_eta").get<double>();
        cap.noise_seed = meta.at("noise_seed").get<uint64_t>();
        cap.degraded = meta.at("degraded").get<bool>();
        bundle.gen.m = meta.at("generator").get<std::array<int, 4>>();
        if (cap.design == CaptureDesign::SingleBinary) {
            const auto& code = meta.at("code");
            const CodeKind kind = code_kind_from_name(code.at("kind").get<std::string>());
            std::optional<uint64_t> seed;
            if (kind == CodeKind::PseudoRandom) seed = code.at("seed").get<uint64_t>();
            cap.code = make_code(kind, code.at("m").get<int>(), seed, code.at("rows").get<int>());
        }
        cap.images.reserve(pack.frames);
        for (int i = 0; i < pack.frames; ++i) cap.images.push_back(pack.frame(i));
        if (cap.gains.size() != cap.images.size())
            throw std::runtime_error("gain table does not match image count");
        return bundle;
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error(base + ".json: " + e.what());
    }
}

RunConfig parse_run_config(const std::string& json_text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("Config is not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw std::invalid_argument("Config must be a JSON object.");
    RunConfig cfg;
    try {
        for (const auto& [key, value] : doc.items()) {
            if (key == "schemes") cfg.schemes = value.get<std::vector<std::string>>();
            else if (key == "sigmas") cfg.sigmas = value.get<std::vector<double>>();
            else if (key == "generator") cfg.generator = value.get<std::array<int, 4>>();
            else if (key == "lattice_n") cfg.lattice_n = value.get<int>();
            else if (key == "m") cfg.m = value.get<int>();
            else if (key == "design") cfg.design = value.get<std::string>();
            else if (key == "demosaic") cfg.demosaic = value.get<std::string>();
            else if (key == "cutoff") cfg.cutoff = value.get<double>();
            else if (key == "sigma") cfg.sigma = value.get<double>();
            else if (key == "eta") cfg.eta = value.get<double>();
            else if (key == "gain") cfg.gain = value.get<double>();
            else if (key == "split") cfg.split = value.get<double>();
            else if (key == "tile") cfg.tile = value.get<int>();
            else if (key == "chips") cfg.chips = value.get<int>();
            else if (key == "seed") cfg.seed = value.get<uint64_t>();
            else if (key == "threads") cfg.threads = value.get<int>();
            else if (key == "input") cfg.input = value.get<std::string>();
            else if (key == "output") cfg.output = value.get<std::string>();
            else if (key == "corpus") cfg.corpus = value.get<std::string>();
            else throw std::invalid_argument("Unknown config key: " + key);
        }
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("Bad config value: ") + e.what());
    }
    if (cfg.generator && cfg.lattice_n)
        throw std::invalid_argument("Config sets both generator and lattice_n; pick one.");
    return cfg;
}

RunConfig load_run_config(const std::string& path) {
    try {
        return parse_run_config(read_file(path));
    } catch (const std::invalid_argument& e) {
        throw std::invalid_argument(path + ": " + e.what());
    }
}

}  // namespace fc
