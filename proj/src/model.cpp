#include "subpt/model.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace subpt::model {

PromptState::PromptState(std::size_t d_, std::size_t m_, std::vector<double> flat_)
    : d(d_), m(m_), flat(std::move(flat_)) {
    if (d == 0 || m == 0) throw Error("ZeroDimension", "prompt dims must be >= 1");
    if (flat.size() != d * m) throw Error("DimensionMismatch", "prompt length != d*M");
    if (!all_finite(flat)) throw Error("NonFinite", "prompt entries must be finite");
}

Encoder::Encoder(std::uint64_t seed, std::size_t d, std::size_t m, std::size_t h,
                 std::size_t n_out)
    : seed_(seed), d_(d), m_(m), h_(h), out_(n_out), in_((m + 1) * d) {
    if (d == 0 || m == 0 || h == 0 || n_out == 0)
        throw Error("ZeroDimension", "encoder dims must be >= 1");

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    auto fill = [&](std::vector<double>& v, std::size_t count, double stddev) {
        v.resize(count);
        for (double& x : v) x = stddev * gauss(rng);
    };
    fill(w1_, h_ * in_, 1.0 / std::sqrt(static_cast<double>(in_)));
    fill(b1_, h_, 0.0);
    fill(w2_, out_ * h_, 1.0 / std::sqrt(static_cast<double>(h_)));
    fill(b2_, out_, 0.0);
}

std::vector<double> Encoder::parameters() const {
    std::vector<double> p;
    p.reserve(param_count());
    p.insert(p.end(), w1_.begin(), w1_.end());
    p.insert(p.end(), b1_.begin(), b1_.end());
    p.insert(p.end(), w2_.begin(), w2_.end());
    p.insert(p.end(), b2_.begin(), b2_.end());
    return p;
}

Encoder::Forward Encoder::forward(const PromptState& prompt, const ClassEmbedding& c) const {
    if (prompt.d != d_ || prompt.m != m_)
        throw Error("DimensionMismatch", "prompt dims do not match encoder");
    if (c.vector.size() != d_)
        throw Error("DimensionMismatch", "class embedding dim does not match encoder");

    // Input is [flattened prompt, class embedding].
    Forward f;
    f.hidden.resize(h_);
    for (std::size_t i = 0; i < h_; ++i) {
        double acc = b1_[i];
        const double* row = &w1_[i * in_];
        for (std::size_t j = 0; j < prompt.flat.size(); ++j) acc += row[j] * prompt.flat[j];
        for (std::size_t j = 0; j < d_; ++j) acc += row[prompt.flat.size() + j] * c.vector[j];
        f.hidden[i] = std::tanh(acc);
    }
    f.raw_out.resize(out_);
    double sq = 0.0;
    for (std::size_t i = 0; i < out_; ++i) {
        double acc = b2_[i];
        const double* row = &w2_[i * h_];
        for (std::size_t j = 0; j < h_; ++j) acc += row[j] * f.hidden[j];
        f.raw_out[i] = acc;
        sq += acc * acc;
    }
    f.raw_norm = std::sqrt(sq);
    return f;
}

Feature Encoder::encode(const PromptState& prompt, const ClassEmbedding& c) const {
    Forward f = forward(prompt, c);
    Feature out;
    out.vector.resize(out_);
    for (std::size_t i = 0; i < out_; ++i) out.vector[i] = f.raw_out[i] / f.raw_norm;
    return out;
}

void Encoder::encode_vjp(const PromptState& prompt, const ClassEmbedding& c,
                         const std::vector<double>& grad_feature,
                         std::vector<double>& grad_prompt) const {
    Forward f = forward(prompt, c);
    if (grad_feature.size() != out_)
        throw Error("DimensionMismatch", "feature gradient dim does not match encoder");
    if (grad_prompt.size() != prompt.flat.size())
        throw Error("DimensionMismatch", "prompt gradient length != d*M");

    // Through w = o/|o|:  dL/do = (g - (w.g) w) / |o|.
    const double inv_norm = 1.0 / f.raw_norm;
    double wg = 0.0;
    for (std::size_t i = 0; i < out_; ++i) wg += grad_feature[i] * f.raw_out[i] * inv_norm;
    std::vector<double> grad_raw(out_);
    for (std::size_t i = 0; i < out_; ++i)
        grad_raw[i] = (grad_feature[i] - wg * f.raw_out[i] * inv_norm) * inv_norm;

    std::vector<double> grad_hidden(h_, 0.0);
    for (std::size_t i = 0; i < out_; ++i) {
        const double* row = &w2_[i * h_];
        for (std::size_t j = 0; j < h_; ++j) grad_hidden[j] += row[j] * grad_raw[i];
    }
    const std::size_t pdim = prompt.flat.size();
    for (std::size_t i = 0; i < h_; ++i) {
        const double gpre = grad_hidden[i] * (1.0 - f.hidden[i] * f.hidden[i]);
        const double* row = &w1_[i * in_];
        for (std::size_t j = 0; j < pdim; ++j) grad_prompt[j] += gpre * row[j];
    }
}

Encoder build_encoder(std::uint64_t seed, std::size_t d, std::size_t m, std::size_t h,
                      std::size_t n_out) {
    return Encoder(seed, d, m, h, n_out);
}

Feature encode_text(const Encoder& enc, const PromptState& prompt, const ClassEmbedding& c) {
    return enc.encode(prompt, c);
}

std::vector<double> predict_proba(const Feature& z, const std::vector<Feature>& text_feats,
                                  double tau) {
    if (text_feats.empty()) throw Error("EmptyClassSet", "no text features");
    if (tau <= 0.0) throw Error("NonPositiveTau", "tau must be positive");

    std::vector<double> logits(text_feats.size());
    for (std::size_t i = 0; i < text_feats.size(); ++i) {
        if (text_feats[i].vector.size() != z.vector.size())
            throw Error("DimensionMismatch", "feature dims disagree");
        logits[i] = dot(z.vector, text_feats[i].vector) / tau;
    }
    const double mx = *std::max_element(logits.begin(), logits.end());
    double sum = 0.0;
    for (double& l : logits) {
        l = std::exp(l - mx);
        sum += l;
    }
    for (double& l : logits) l /= sum;
    return logits;
}

LossGrad ce_loss_and_grad(const Encoder& enc, const PromptState& prompt,
                          const std::vector<ClassEmbedding>& classes,
                          const std::vector<std::pair<Feature, std::size_t>>& batch,
                          double tau) {
    if (batch.empty()) throw Error("EmptyBatch", "batch must be nonempty");
    if (classes.empty()) throw Error("EmptyClassSet", "no classes");
    if (tau <= 0.0) throw Error("NonPositiveTau", "tau must be positive");
    for (const auto& [z, y] : batch)
        if (y >= classes.size()) throw Error("LabelOutOfRange", "label exceeds class count");

    const std::size_t n_class = classes.size();
    std::vector<Feature> text_feats(n_class);
    for (std::size_t i = 0; i < n_class; ++i) text_feats[i] = enc.encode(prompt, classes[i]);

    LossGrad out;
    out.grad.assign(prompt.dim(), 0.0);

    // Accumulate dL/dw_i over the batch, then one backprop per class.
    std::vector<std::vector<double>> grad_w(n_class,
                                            std::vector<double>(enc.out_dim(), 0.0));
    for (const auto& [z, y] : batch) {
        std::vector<double> p = predict_proba(z, text_feats, tau);
        out.loss -= std::log(p[y]);
        for (std::size_t i = 0; i < n_class; ++i) {
            const double coeff = (p[i] - (i == y ? 1.0 : 0.0)) / tau;
            for (std::size_t k = 0; k < enc.out_dim(); ++k)
                grad_w[i][k] += coeff * z.vector[k];
        }
    }
    for (std::size_t i = 0; i < n_class; ++i)
        enc.encode_vjp(prompt, classes[i], grad_w[i], out.grad);
    return out;
}

LossGrad nfl_loss_and_grad(const Encoder& enc, const PromptState& prompt,
                           const std::vector<ClassEmbedding>& target_classes,
                           const std::vector<Feature>& teacher) {
    if (target_classes.empty()) throw Error("EmptyTargets", "no NFL targets");
    if (target_classes.size() != teacher.size())
        throw Error("LengthMismatch", "targets and teacher features differ in length");

    const double inv_n = 1.0 / static_cast<double>(target_classes.size());
    LossGrad out;
    out.grad.assign(prompt.dim(), 0.0);
    for (std::size_t i = 0; i < target_classes.size(); ++i) {
        Feature w = enc.encode(prompt, target_classes[i]);
        out.loss += inv_n * (1.0 - dot(w.vector, teacher[i].vector));
        std::vector<double> gw(w.vector.size());
        for (std::size_t k = 0; k < gw.size(); ++k) gw[k] = -inv_n * teacher[i].vector[k];
        enc.encode_vjp(prompt, target_classes[i], gw, out.grad);
    }
    return out;
}

LossGrad total_loss_and_grad(const Encoder& enc, const PromptState& prompt,
                             const std::vector<ClassEmbedding>& classes,
                             const std::vector<std::pair<Feature, std::size_t>>& batch,
                             double tau,
                             const std::vector<ClassEmbedding>& nfl_targets,
                             const std::vector<Feature>& teacher, double lambda) {
    if (lambda < 0.0) throw Error("NegativeLambda", "lambda must be nonnegative");
    LossGrad out = ce_loss_and_grad(enc, prompt, classes, batch, tau);
    if (lambda == 0.0) return out;
    LossGrad cs = nfl_loss_and_grad(enc, prompt, nfl_targets, teacher);
    out.loss += lambda * cs.loss;
    for (std::size_t i = 0; i < out.grad.size(); ++i) out.grad[i] += lambda * cs.grad[i];
    return out;
}

}  // namespace subpt::model
