#pragma once

// Small synthetic dataset pushed through every pipeline stage once per test
// binary; shared by the API, server and pipeline tests.

#include <memory>

#include "support.hpp"
#include "visrisk/pipeline.hpp"
#include "visrisk/synthetic.hpp"

namespace testsupport {

struct PipelineFixture {
    TempDir dir{"pipeline"};
    std::filesystem::path config_path;
    std::filesystem::path data_dir;
    visrisk::pipeline::Config config;
    std::shared_ptr<const visrisk::Workspace> workspace;

    PipelineFixture() {
        visrisk::synthetic::Options opt;
        opt.entities = 8;
        opt.quarters = 24;
        opt.indicators = 5;
        opt.banks = 8;
        opt.documents = 80;
        config_path = visrisk::synthetic::write_dataset(opt, dir.path / "input");
        data_dir = dir.path / "data";
        config = visrisk::pipeline::load_config(config_path);
        config.som.width = 6;
        config.som.height = 4;
        config.network.layout.iterations = 100;
        namespace pl = visrisk::pipeline;
        pl::run_ingest(config, data_dir);
        pl::run_train_som(config, data_dir);
        pl::run_train_sotm(config, data_dir);
        pl::run_network(config, data_dir);
        pl::run_ewm_fit(config, data_dir);
        pl::run_ewm_score(config, data_dir);
        workspace = pl::load_workspace(config, data_dir);
    }

    static PipelineFixture& shared() {
        static PipelineFixture f;
        return f;
    }
};

}  // namespace testsupport
