#pragma once

#include <memory>
#include <ostream>

#include "scribe/config.hpp"
#include "scribe/model.hpp"
#include "scribe/objective.hpp"
#include "scribe/trainer.hpp"

namespace scribe {

// Datasets assembled from a configuration.
struct Datasets {
    std::unique_ptr<Objective> train;
    std::unique_ptr<Objective> valid;
};

struct TrainJob {
    Model model;
    Optimizer optimizer;
    TrainConfig train;
    Datasets data;
};

// Every key understood by the `train` command.
const std::set<std::string> &train_config_keys();

// Reads data, builds (or resumes) the model and the trainer settings.
TrainJob prepare_train_job(const ConfigFile &cfg);

// Runs the job, writing one JSON object per epoch to `metrics` and the
// checkpoint to the configured path.
TrainResult run_train_job(TrainJob &job, std::ostream &metrics);

TrainConfig train_config_from(const ConfigFile &cfg);

// Scoring data for an existing model: a text file (chunked, stateful) or a
// JSON-lines stroke file (normalised with the model's statistics).
std::unique_ptr<Objective> load_eval_data(const Model &model, const std::filesystem::path &path,
                                          std::size_t seq_len = 100);

} // namespace scribe
