#pragma once

// Headless pipeline stages. Each stage reads its inputs (CSV files named in
// the config, or artifacts from earlier stages in the data directory) and
// writes one JSON artifact; artifacts on disk are the only coupling.

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "visrisk/ewm.hpp"
#include "visrisk/network.hpp"
#include "visrisk/som.hpp"
#include "visrisk/sotm.hpp"
#include "visrisk/workspace.hpp"

namespace visrisk::pipeline {

namespace fs = std::filesystem;

struct Config {
    fs::path base_dir = ".";
    std::optional<fs::path> observations;
    std::optional<fs::path> links;
    std::optional<fs::path> events;
    std::optional<fs::path> occurrences;
    std::optional<fs::path> ewm_labels;    // entity,time,0|1
    std::optional<fs::path> state_labels;  // entity,time,class

    struct {
        std::size_t width = 13;
        std::size_t height = 10;
        som::TrainConfig train;
        std::string transform = "percentile";
    } som;

    struct {
        sotm::SotmConfig train;
        std::string transform = "percentile";
    } sotm;

    struct {
        std::optional<std::string> from;
        std::optional<std::string> to;
        network::LayoutParams layout;
        std::vector<std::string> distress_terms{"risk", "distress", "default", "bankruptcy", "crisis", "losses"};
    } network;

    struct {
        std::vector<ewm::IndicatorGroup> groups;
        std::map<std::string, double> weights;
        double bias = 0.0;
        ewm::FitConfig fit;
    } ewm;
};

/// Parses a JSON config; relative paths resolve against the file's directory.
/// Throws std::invalid_argument for bad parameters and DataError for unreadable files.
Config load_config(const fs::path& path);

// Artifact file names inside the data directory.
inline constexpr const char* kCubeFile = "cube.json";
inline constexpr const char* kSomFile = "som.json";
inline constexpr const char* kSotmFile = "sotm.json";
inline constexpr const char* kNetworkFile = "network.json";
inline constexpr const char* kEwmModelFile = "ewm_model.json";
inline constexpr const char* kRiskFile = "risk.json";

fs::path run_ingest(const Config& cfg, const fs::path& data_dir);
fs::path run_train_som(const Config& cfg, const fs::path& data_dir);
fs::path run_train_sotm(const Config& cfg, const fs::path& data_dir);
fs::path run_network(const Config& cfg, const fs::path& data_dir);
fs::path run_ewm_fit(const Config& cfg, const fs::path& data_dir, std::optional<std::string>* warning = nullptr);
fs::path run_ewm_score(const Config& cfg, const fs::path& data_dir);

/// Loads whatever artifacts exist; the cube is required.
std::shared_ptr<const Workspace> load_workspace(const Config& cfg, const fs::path& data_dir);

/// Modification times and sizes of the artifacts present in `data_dir`; changes
/// whenever a pipeline stage republishes. Used by `serve` to reload.
std::string artifact_signature(const fs::path& data_dir);

/// Renders `view` with the state encoded in `token` (may be empty) to `out`.
void run_export(const Config& cfg, const fs::path& data_dir, const std::string& view, const std::string& token,
                const fs::path& out);

/// Default three-group split into contiguous thirds, used when the config names none.
std::vector<ewm::IndicatorGroup> default_groups(const std::vector<std::string>& indicators);

}  // namespace visrisk::pipeline
