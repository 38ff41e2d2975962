#include "subpt/trainer.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

namespace subpt::train {

std::string TrainConfig::fingerprint() const {
    std::ostringstream ss;
    ss << "seed=" << seed << " epochs=" << epochs << " lr=" << lr
       << " sched=" << to_string(lr_schedule) << " momentum=" << momentum
       << " M=" << tokens << " d=" << token_dim << " H=" << hidden
       << " init_std=" << init_std << " tau=" << tau << " lambda=" << lambda
       << " nfl=" << to_string(nfl_target) << " t_early=" << t_early << " r=" << rank
       << " mode=" << to_string(mode);
    return ss.str();
}

namespace {

void validate(const TrainConfig& cfg, const model::Encoder& enc,
              const std::optional<sub::Subspace>& subspace) {
    if (cfg.epochs < 1 || cfg.lr < 0.0) throw Error("ConfigInvalid", "epochs >= 1, lr >= 0");
    if (cfg.momentum < 0.0 || cfg.momentum >= 1.0)
        throw Error("ConfigInvalid", "momentum must be in [0, 1)");
    if (cfg.lambda < 0.0) throw Error("ConfigInvalid", "lambda must be >= 0");
    if (cfg.tokens != enc.tokens() || cfg.token_dim != enc.d())
        throw Error("DimensionMismatch", "config prompt dims do not match encoder");
    if (cfg.mode == Mode::Projected && !subspace)
        throw Error("ConfigInvalid", "projected mode requires a subspace");
    if (cfg.mode != Mode::Projected && subspace)
        throw Error("ConfigInvalid", "subspace given but mode is not projected");
    if (cfg.mode == Mode::SubptPipeline) {
        if (cfg.t_early < 2 || cfg.t_early > cfg.epochs)
            throw Error("ConfigInvalid", "need 2 <= t_early <= epochs");
        if (cfg.rank < 1 || cfg.rank > cfg.t_early - 1)
            throw Error("ConfigInvalid", "need 1 <= r <= t_early - 1");
    }
    if (subspace && subspace->ambient_dim() != cfg.tokens * cfg.token_dim)
        throw Error("DimensionMismatch", "subspace ambient dim != d*M");
}

double lr_at(const TrainConfig& cfg, std::size_t epoch) {
    if (cfg.lr_schedule == LrSchedule::Constant) return cfg.lr;
    // Cosine annealing from lr to 0 across the run; epoch is 1-based.
    const double t = static_cast<double>(epoch - 1) / static_cast<double>(cfg.epochs);
    return cfg.lr * 0.5 * (1.0 + std::cos(std::numbers::pi * t));
}

std::vector<model::ClassEmbedding> nfl_classes(NflTarget target,
                                               const synth::SyntheticTask& task) {
    switch (target) {
        case NflTarget::Base: return task.base_classes;
        case NflTarget::Novel: return task.novel_classes;
        case NflTarget::Pool: return task.pool_classes;
        case NflTarget::Whole: {
            auto all = task.base_classes;
            all.insert(all.end(), task.novel_classes.begin(), task.novel_classes.end());
            return all;
        }
        default: return {};
    }
}

std::vector<model::Feature> nfl_teacher(NflTarget target, const synth::SyntheticTask& task) {
    switch (target) {
        case NflTarget::Base: return task.teacher_base();
        case NflTarget::Novel: return task.teacher_novel();
        case NflTarget::Pool: return task.teacher_pool();
        case NflTarget::Whole: {
            auto all = task.teacher_base();
            auto nv = task.teacher_novel();
            all.insert(all.end(), nv.begin(), nv.end());
            return all;
        }
        default: return {};
    }
}

}  // namespace

double evaluate(const model::Encoder& enc, const model::PromptState& prompt,
                const std::vector<model::ClassEmbedding>& classes,
                const std::vector<synth::Sample>& split, double tau) {
    if (split.empty()) throw Error("EmptySplit", "evaluation split is empty");
    std::vector<model::Feature> text_feats;
    text_feats.reserve(classes.size());
    for (const auto& c : classes) text_feats.push_back(enc.encode(prompt, c));
    (void)tau;  // argmax is temperature-invariant

    std::size_t correct = 0;
    for (const auto& s : split) {
        std::size_t best = 0;
        double best_sim = dot(s.z.vector, text_feats[0].vector);
        for (std::size_t i = 1; i < text_feats.size(); ++i) {
            const double sim = dot(s.z.vector, text_feats[i].vector);
            if (sim > best_sim) {
                best_sim = sim;
                best = i;
            }
        }
        if (best == s.label) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(split.size());
}

RunResult train(const TrainConfig& cfg, const synth::SyntheticTask& task,
                const model::Encoder& enc, const std::optional<sub::Subspace>& subspace) {
    validate(cfg, enc, subspace);

    const std::size_t dim = cfg.tokens * cfg.token_dim;
    std::mt19937_64 rng(cfg.seed);
    std::normal_distribution<double> gauss(0.0, cfg.init_std);
    std::vector<double> v(dim);
    for (double& x : v) x = gauss(rng);

    RunResult result;
    result.trajectory.param_dim = dim;
    result.trajectory.fingerprint = cfg.fingerprint();
    traj::record(result.trajectory, v);
    result.subspace = subspace;

    const bool use_nfl = cfg.nfl_target != NflTarget::None && cfg.lambda > 0.0;
    const auto targets = nfl_classes(cfg.nfl_target, task);
    const auto teacher = nfl_teacher(cfg.nfl_target, task);

    std::vector<std::pair<model::Feature, std::size_t>> batch;
    for (const auto& s : task.train) batch.emplace_back(s.z, s.label);

    std::vector<double> velocity(dim, 0.0);
    for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
        model::PromptState prompt(cfg.token_dim, cfg.tokens, v);

        model::LossGrad ce =
            model::ce_loss_and_grad(enc, prompt, task.base_classes, batch, cfg.tau);
        double nfl_loss = 0.0;
        model::LossGrad total = ce;
        if (use_nfl) {
            model::LossGrad cs = model::nfl_loss_and_grad(enc, prompt, targets, teacher);
            nfl_loss = cs.loss;
            total.loss += cfg.lambda * cs.loss;
            for (std::size_t i = 0; i < dim; ++i) total.grad[i] += cfg.lambda * cs.grad[i];
        }

        const double raw_norm = norm2(total.grad);
        std::vector<double> g =
            subspace ? sub::project(*subspace, total.grad) : total.grad;
        const double proj_norm = norm2(g);

        // Projection precedes momentum: velocity stays inside span(U).
        const double alpha = lr_at(cfg, epoch);
        if (cfg.momentum > 0.0) {
            for (std::size_t i = 0; i < dim; ++i) {
                velocity[i] = cfg.momentum * velocity[i] + g[i];
                v[i] -= alpha * velocity[i];
            }
        } else {
            for (std::size_t i = 0; i < dim; ++i) v[i] -= alpha * g[i];
        }
        traj::record(result.trajectory, v);

        model::PromptState updated(cfg.token_dim, cfg.tokens, v);
        MetricsRow row;
        row.epoch = epoch;
        row.train_loss = total.loss;
        row.train_acc = evaluate(enc, updated, task.base_classes, task.train, cfg.tau);
        row.base_test_acc = evaluate(enc, updated, task.base_classes, task.base_test, cfg.tau);
        row.novel_test_acc =
            evaluate(enc, updated, task.novel_classes, task.novel_test, cfg.tau);
        row.grad_norm_raw = raw_norm;
        row.grad_norm_projected = proj_norm;
        row.nfl_loss = nfl_loss;
        result.metrics.push_back(row);
    }

    result.final_prompt = model::PromptState(cfg.token_dim, cfg.tokens, v);
    return result;
}

PipelineResult subpt_pipeline(const TrainConfig& cfg, const synth::SyntheticTask& task,
                              const model::Encoder& enc) {
    if (cfg.mode != Mode::SubptPipeline)
        throw Error("ConfigInvalid", "subpt_pipeline requires mode subpt_pipeline");
    TrainConfig stage_cfg = cfg;
    stage_cfg.mode = Mode::SubptPipeline;  // keep bounds validation
    validate(stage_cfg, enc, std::nullopt);

    TrainConfig plain = cfg;
    plain.mode = Mode::Coop;
    PipelineResult result;
    result.stage1 = train(plain, task, enc);

    result.subspace = sub::pca_fit(result.stage1.trajectory, {1, cfg.t_early}, cfg.rank);

    TrainConfig projected = cfg;
    projected.mode = Mode::Projected;
    result.stage3 = train(projected, task, enc, result.subspace);
    return result;
}

OrthogonalityReport analyze_orthogonality(const traj::Trajectory& trajectory,
                                          std::pair<std::size_t, std::size_t> early,
                                          std::pair<std::size_t, std::size_t> later,
                                          std::size_t r) {
    sub::Subspace a = sub::pca_fit(trajectory, early, r);
    sub::Subspace b = sub::pca_fit(trajectory, later, r);
    OrthogonalityReport report;
    report.alignment = sub::leading_alignment(a, b);
    report.early_variance_ratios = a.variance_ratios;
    report.later_variance_ratios = b.variance_ratios;
    return report;
}

void save_metrics_csv(const std::vector<MetricsRow>& metrics, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("IoFailure", "cannot open for writing: " + path);
    out << "epoch,train_loss,train_acc,base_test_acc,novel_test_acc,"
           "grad_norm_raw,grad_norm_projected,nfl_loss\n";
    char buf[200];
    for (const auto& m : metrics) {
        std::snprintf(buf, sizeof buf, "%zu,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g\n", m.epoch,
                      m.train_loss, m.train_acc, m.base_test_acc, m.novel_test_acc,
                      m.grad_norm_raw, m.grad_norm_projected, m.nfl_loss);
        out << buf;
    }
    if (!out) throw Error("IoFailure", "write failed: " + path);
}

NflTarget parse_nfl_target(const std::string& s) {
    if (s == "none") return NflTarget::None;
    if (s == "base") return NflTarget::Base;
    if (s == "novel") return NflTarget::Novel;
    if (s == "whole") return NflTarget::Whole;
    if (s == "pool") return NflTarget::Pool;
    throw Error("ConfigInvalid", "unknown nfl_target: " + s);
}

std::string to_string(NflTarget t) {
    switch (t) {
        case NflTarget::None: return "none";
        case NflTarget::Base: return "base";
        case NflTarget::Novel: return "novel";
        case NflTarget::Whole: return "whole";
        case NflTarget::Pool: return "pool";
    }
    return "none";
}

Mode parse_mode(const std::string& s) {
    if (s == "coop") return Mode::Coop;
    if (s == "projected") return Mode::Projected;
    if (s == "subpt") return Mode::SubptPipeline;
    throw Error("ConfigInvalid", "unknown mode: " + s);
}

std::string to_string(Mode m) {
    switch (m) {
        case Mode::Coop: return "coop";
        case Mode::Projected: return "projected";
        case Mode::SubptPipeline: return "subpt";
    }
    return "coop";
}

LrSchedule parse_schedule(const std::string& s) {
    if (s == "constant") return LrSchedule::Constant;
    if (s == "cosine") return LrSchedule::Cosine;
    throw Error("ConfigInvalid", "unknown lr_schedule: " + s);
}

std::string to_string(LrSchedule s) {
    return s == LrSchedule::Constant ? "constant" : "cosine";
}

}  // namespace subpt::train
