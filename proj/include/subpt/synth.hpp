#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "subpt/common.hpp"
#include "subpt/model.hpp"

namespace subpt::synth {

enum class SpuriousTestMode { Absent, Flipped };

struct SynthConfig {
    std::size_t n_base = 8;
    std::size_t n_novel = 8;
    std::size_t n_pool = 100;
    std::size_t feat_dim = 32;   // D
    std::size_t embed_dim = 8;   // d, must match the encoder token dim
    std::size_t shots = 4;
    std::size_t test_per_class = 50;
    double beta = 1.5;           // spurious strength on the train split
    double sigma = 0.3;          // isotropic noise scale
    double teacher_eps = 0.1;    // teacher perturbation
    SpuriousTestMode spurious_test_mode = SpuriousTestMode::Absent;
    std::uint64_t seed = 0;
};

struct Sample {
    model::Feature z;
    std::size_t label;
};

// Few-shot task: base classes whose train samples carry a spurious
// label-correlated direction absent (or sign-flipped) at test time, novel
// classes evaluated zero-shot, and a disjoint pool for the NFL regularizer.
struct SyntheticTask {
    SynthConfig cfg;
    std::vector<model::ClassEmbedding> base_classes;
    std::vector<model::ClassEmbedding> novel_classes;
    std::vector<model::ClassEmbedding> pool_classes;
    std::vector<std::vector<double>> gen_dirs;    // n_base + n_novel rows in R^D
    std::vector<std::vector<double>> spur_dirs;   // n_base rows in R^D
    std::vector<std::vector<double>> pool_dirs;   // n_pool rows in R^D (unit, not orthogonalized)
    std::vector<Sample> train;                    // labels in [0, n_base)
    std::vector<Sample> base_test;                // labels in [0, n_base)
    std::vector<Sample> novel_test;               // labels in [0, n_novel)
    std::vector<model::Feature> teacher;          // base, then novel, then pool

    const std::vector<double>& gen_dir_base(std::size_t i) const { return gen_dirs[i]; }
    const std::vector<double>& gen_dir_novel(std::size_t j) const {
        return gen_dirs[cfg.n_base + j];
    }
    std::vector<model::Feature> teacher_base() const;
    std::vector<model::Feature> teacher_novel() const;
    std::vector<model::Feature> teacher_pool() const;
};

SyntheticTask generate_task(const SynthConfig& cfg);

// w*_i = normalize(dir_i + eps * noise), one per class (base, novel, pool).
std::vector<model::Feature> teacher_features(const SyntheticTask& task, double eps,
                                             std::uint64_t seed);

// Text format "SUBPT-TASK 1"; round-trip bit-exact.
void save(const SyntheticTask& task, const std::string& path);
SyntheticTask load(const std::string& path);

}  // namespace subpt::synth
