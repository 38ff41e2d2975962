#pragma once

#include <string>
#include <vector>

#include "subpt/common.hpp"

namespace subpt::traj {

// Ordered per-epoch checkpoints of the flattened prompt. Row 0 is the
// initialization; row t (t >= 1) is the checkpoint at the end of epoch t.
struct Trajectory {
    std::size_t param_dim = 0;
    std::vector<std::vector<double>> rows;
    std::string fingerprint;  // seed/config id of the producing run

    std::size_t epochs() const { return rows.empty() ? 0 : rows.size() - 1; }
};

void record(Trajectory& traj, const std::vector<double>& v);

// Text format "SUBPT-TRAJ 1 <row_count> <param_dim>", then
// "# <fingerprint>", then one space-separated row per line with
// round-trip decimal precision. Canonical: save(load(f)) is byte-identical.
void save(const Trajectory& traj, const std::string& path);
Trajectory load(const std::string& path);

}  // namespace subpt::traj
