#pragma once

// Synthetic macro-financial panel with crisis episodes, interlinkages and a
// bank-mention corpus. Used for smoke runs and demos; deterministic per seed.

#include <cstdint>
#include <filesystem>

namespace visrisk::synthetic {

struct Options {
    std::size_t entities = 28;
    std::size_t quarters = 88;  // from start_year Q1
    std::size_t indicators = 14;
    int start_year = 1990;
    std::size_t banks = 20;
    std::size_t documents = 400;
    double missing_rate = 0.02;
    std::uint64_t seed = 7;
};

/// Writes observations.csv, links.csv, events.csv, occurrences.csv,
/// ewm_labels.csv, states.csv and config.json into `dir`. Returns the config path.
std::filesystem::path write_dataset(const Options& opt, const std::filesystem::path& dir);

}  // namespace visrisk::synthetic
