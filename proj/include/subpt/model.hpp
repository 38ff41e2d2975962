#pragma once

#include <cstdint>
#include <vector>

#include "subpt/common.hpp"

namespace subpt::model {

// Learnable prompt: M token vectors of dimension d, stored flattened
// (token-major, length d*M).
struct PromptState {
    std::size_t d = 0;
    std::size_t m = 0;
    std::vector<double> flat;  // length d*m

    PromptState() = default;
    PromptState(std::size_t d_, std::size_t m_, std::vector<double> flat_);
    std::size_t dim() const { return d * m; }
};

// Fixed per-class name embedding, unit norm in R^d.
struct ClassEmbedding {
    std::vector<double> vector;
};

// Length-D feature vector; unit norm when produced by encode_text or used as
// an image feature.
struct Feature {
    std::vector<double> vector;
};

// Frozen two-layer network: input (M+1)*d -> tanh hidden H -> output D,
// followed by l2 normalization. Parameters are a pure function of
// (seed, d, M, H, D) and never change after construction.
class Encoder {
public:
    Encoder(std::uint64_t seed, std::size_t d, std::size_t m, std::size_t h, std::size_t n_out);

    std::size_t d() const { return d_; }
    std::size_t tokens() const { return m_; }
    std::size_t hidden() const { return h_; }
    std::size_t out_dim() const { return out_; }
    std::uint64_t seed() const { return seed_; }

    std::size_t param_count() const {
        return in_ * h_ + h_ + h_ * out_ + out_;
    }
    std::vector<double> parameters() const;

    Feature encode(const PromptState& prompt, const ClassEmbedding& c) const;

    // Vector-Jacobian product: given the gradient of some scalar with respect
    // to the normalized output feature, returns its gradient with respect to
    // the flattened prompt. Accumulates into grad (length d*M).
    void encode_vjp(const PromptState& prompt, const ClassEmbedding& c,
                    const std::vector<double>& grad_feature,
                    std::vector<double>& grad_prompt) const;

private:
    std::uint64_t seed_;
    std::size_t d_, m_, h_, out_, in_;
    std::vector<double> w1_;  // h_ x in_, row-major
    std::vector<double> b1_;  // h_
    std::vector<double> w2_;  // out_ x h_
    std::vector<double> b2_;  // out_

    struct Forward {
        std::vector<double> hidden;       // tanh activations
        std::vector<double> raw_out;      // pre-normalization output
        double raw_norm = 0.0;
    };
    Forward forward(const PromptState& prompt, const ClassEmbedding& c) const;
};

Encoder build_encoder(std::uint64_t seed, std::size_t d, std::size_t m, std::size_t h,
                      std::size_t n_out);

Feature encode_text(const Encoder& enc, const PromptState& prompt, const ClassEmbedding& c);

// Softmax over similarity scores z.w_i / tau.
std::vector<double> predict_proba(const Feature& z, const std::vector<Feature>& text_feats,
                                  double tau);

struct LossGrad {
    double loss = 0.0;
    std::vector<double> grad;  // w.r.t. flattened prompt
};

// Cross-entropy summed over the batch, with the exact analytic gradient.
LossGrad ce_loss_and_grad(const Encoder& enc, const PromptState& prompt,
                          const std::vector<ClassEmbedding>& classes,
                          const std::vector<std::pair<Feature, std::size_t>>& batch,
                          double tau);

// Novel Feature Learner: mean cosine distance to frozen teacher features.
LossGrad nfl_loss_and_grad(const Encoder& enc, const PromptState& prompt,
                           const std::vector<ClassEmbedding>& target_classes,
                           const std::vector<Feature>& teacher);

// L = L_ce + lambda * L_cs.
LossGrad total_loss_and_grad(const Encoder& enc, const PromptState& prompt,
                             const std::vector<ClassEmbedding>& classes,
                             const std::vector<std::pair<Feature, std::size_t>>& batch,
                             double tau,
                             const std::vector<ClassEmbedding>& nfl_targets,
                             const std::vector<Feature>& teacher, double lambda);

}  // namespace subpt::model
