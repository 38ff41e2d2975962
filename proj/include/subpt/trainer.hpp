#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "subpt/common.hpp"
#include "subpt/model.hpp"
#include "subpt/subspace.hpp"
#include "subpt/synth.hpp"
#include "subpt/trajectory.hpp"

namespace subpt::train {

enum class LrSchedule { Constant, Cosine };
enum class Mode { Coop, Projected, SubptPipeline };
enum class NflTarget { None, Base, Novel, Whole, Pool };

struct TrainConfig {
    std::size_t epochs = 50;
    double lr = 2e-3;
    LrSchedule lr_schedule = LrSchedule::Cosine;
    double momentum = 0.0;
    std::size_t tokens = 16;     // M
    std::size_t token_dim = 8;   // d
    std::size_t hidden = 32;     // encoder hidden width
    double init_std = 0.02;
    double tau = 1.0;
    double lambda = 1.0;
    NflTarget nfl_target = NflTarget::None;
    std::size_t t_early = 0;
    std::size_t rank = 0;        // r
    Mode mode = Mode::Coop;
    std::uint64_t seed = 0;

    std::string fingerprint() const;
};

struct MetricsRow {
    std::size_t epoch = 0;
    double train_loss = 0.0;
    double train_acc = 0.0;
    double base_test_acc = 0.0;
    double novel_test_acc = 0.0;
    double grad_norm_raw = 0.0;
    double grad_norm_projected = 0.0;
    double nfl_loss = 0.0;
};

struct RunResult {
    traj::Trajectory trajectory;
    std::vector<MetricsRow> metrics;
    model::PromptState final_prompt;
    std::optional<sub::Subspace> subspace;
};

struct PipelineResult {
    RunResult stage1;
    sub::Subspace subspace;
    RunResult stage3;
};

struct OrthogonalityReport {
    double alignment = 0.0;
    std::vector<double> early_variance_ratios;
    std::vector<double> later_variance_ratios;
};

// One full SGD run. Prompt initialized from cfg.seed with N(0, init_std);
// full-batch gradient per epoch; gradient projected through `subspace` when
// present (mode Projected). Deterministic in (cfg, task, enc).
RunResult train(const TrainConfig& cfg, const synth::SyntheticTask& task,
                const model::Encoder& enc,
                const std::optional<sub::Subspace>& subspace = std::nullopt);

// Stage 1 plain run, PCA over window (1, t_early) with rank r, stage 3
// projected rerun from the identical initialization.
PipelineResult subpt_pipeline(const TrainConfig& cfg, const synth::SyntheticTask& task,
                              const model::Encoder& enc);

double evaluate(const model::Encoder& enc, const model::PromptState& prompt,
                const std::vector<model::ClassEmbedding>& classes,
                const std::vector<synth::Sample>& split, double tau = 1.0);

OrthogonalityReport analyze_orthogonality(const traj::Trajectory& trajectory,
                                          std::pair<std::size_t, std::size_t> early,
                                          std::pair<std::size_t, std::size_t> later,
                                          std::size_t r);

// Header "epoch,train_loss,...", floats at 9 significant digits.
void save_metrics_csv(const std::vector<MetricsRow>& metrics, const std::string& path);

NflTarget parse_nfl_target(const std::string& s);
std::string to_string(NflTarget t);
Mode parse_mode(const std::string& s);
std::string to_string(Mode m);
LrSchedule parse_schedule(const std::string& s);
std::string to_string(LrSchedule s);

}  // namespace subpt::train
