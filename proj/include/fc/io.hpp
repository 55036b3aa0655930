#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fc/capture.hpp"
#include "fc/image.hpp"
#include "fc/lattice.hpp"

namespace fc {

// Binary frame-stack container.  Layout: magic "FSTK", u16 version (1),
// little-endian u32 frames/height/width, u16 sample type (1 = 32-bit
// float), then T*H*W little-endian float samples in frame-major, row-major
// order.  Doubles quantize to float once on write; write-read-write round
// trips are byte-identical.
std::string encode_frame_stack(const FrameStack& stack);
FrameStack decode_frame_stack(const std::string& bytes);

void write_frame_stack(const std::string& path, const FrameStack& stack);
FrameStack read_frame_stack(const std::string& path);

// Writes a sibling temp file and renames it over the target, so readers
// never observe a partial file and a failed write leaves nothing behind.
void write_file_atomic(const std::string& path, const std::string& bytes);
std::string read_file(const std::string& path);

// Binary (P5) portable graymaps; samples scale to [0, 1] on read and are
// clamped and rounded on write.  maxval above 255 selects the two-byte
// big-endian sample encoding.
Image read_pgm(const std::string& path);
void write_pgm(const std::string& path, const Image& image, int maxval = 255);

// Reads every *.pgm in a directory, sorted by filename, as one stack.
FrameStack read_pgm_directory(const std::string& dir);

// A capture saves as <base>.fstk (the camera images stacked in order) plus
// <base>.json with the acquisition metadata needed to decode it later.
void save_capture(const std::string& base, const CodedCapture& capture,
                  const GeneratorMatrix& gen);

struct CaptureBundle {
    CodedCapture capture;
    GeneratorMatrix gen;
};
CaptureBundle load_capture(const std::string& base);

// Run settings shared by the subcommands.  JSON keys mirror the field
// names; unknown keys are rejected so typos cannot silently fall back to
// defaults.
struct RunConfig {
    std::vector<std::string> schemes{"fc", "one-hot", "pseudo-random"};
    std::vector<double> sigmas{0.0, 2.0 / 255, 5.0 / 255, 10.0 / 255, 20.0 / 255};
    std::optional<std::array<int, 4>> generator;  // explicit lattice, row-major
    std::optional<int> lattice_n;                 // or a target |det| to search for
    int m = 4;
    std::string design = "design1";
    std::string demosaic = "fs";
    double cutoff = 0.8;
    double sigma = 0.0;
    double eta = 0.0;
    double gain = 1.0;
    double split = 0.5;
    int tile = 16;
    int chips = 100;
    uint64_t seed = 1;
    std::optional<int> threads;
    std::optional<std::string> input;
    std::optional<std::string> output;
    std::optional<std::string> corpus;
};

RunConfig parse_run_config(const std::string& json_text);
RunConfig load_run_config(const std::string& path);

}  // namespace fc
