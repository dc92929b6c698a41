#pragma once

// File formats: embedding CSV, JSON model file, JSON synthetic spec.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "mopdil/ensembler.hpp"
#include "mopdil/synthbench.hpp"

namespace mopdil {

inline constexpr int kModelSchemaVersion = 1;

struct EmbeddingBounds {
    std::optional<std::size_t> dimension;
    std::optional<std::size_t> num_domains;  // domain must be -1 or < num_domains
    std::optional<std::size_t> num_classes;  // class must be -1 or < num_classes
};

// Header `id,domain,class,d0,...,d{L-1}`; one sample per line.
std::vector<LabeledSample> load_embeddings(const std::filesystem::path& path, const EmbeddingBounds& bounds = {});
std::vector<LabeledSample> parse_embeddings(const std::string& text, const EmbeddingBounds& bounds = {});
std::string format_embeddings(const std::vector<LabeledSample>& samples);
void save_embeddings(const std::vector<LabeledSample>& samples, const std::filesystem::path& path);

// 17 significant digits; parses back to the identical double.
std::string format_real(double value);
double parse_real(const std::string& text);

std::string serialize_model(const FittedMixture& mixture);
FittedMixture deserialize_model(const std::string& text);
void save_model(const FittedMixture& mixture, const std::filesystem::path& path);
FittedMixture load_model(const std::filesystem::path& path);

SynthSpec parse_synth_spec(const std::string& text);
SynthSpec load_synth_spec(const std::filesystem::path& path);
std::string serialize_synth_spec(const SynthSpec& spec);

// Writes to a sibling temp file, then renames over the destination.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);
std::string read_file(const std::filesystem::path& path);

}  // namespace mopdil
