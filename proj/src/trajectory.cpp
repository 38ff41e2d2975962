#include "subpt/trajectory.hpp"

#include <fstream>
#include <sstream>

#include "subpt/textio.hpp"

namespace subpt::traj {

void record(Trajectory& traj, const std::vector<double>& v) {
    if (v.size() != traj.param_dim)
        throw Error("DimensionMismatch", "checkpoint length != param_dim");
    if (!all_finite(v)) throw Error("NonFinite", "checkpoint has non-finite entries");
    traj.rows.push_back(v);
}

void save(const Trajectory& traj, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("IoFailure", "cannot open for writing: " + path);
    out << "SUBPT-TRAJ 1 " << traj.rows.size() << ' ' << traj.param_dim << '\n';
    out << "# " << traj.fingerprint << '\n';
    for (const auto& row : traj.rows) out << textio::fmt_row(row) << '\n';
    if (!out) throw Error("IoFailure", "write failed: " + path);
}

Trajectory load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("IoFailure", "cannot open for reading: " + path);

    std::string header;
    if (!std::getline(in, header)) throw Error("BadFormat", "missing header");
    std::istringstream hs(header);
    std::string magic;
    int version = 0;
    std::size_t row_count = 0, param_dim = 0;
    if (!(hs >> magic >> version >> row_count >> param_dim) || magic != "SUBPT-TRAJ")
        throw Error("BadFormat", "bad trajectory header: " + header);
    if (version != 1) throw Error("BadFormat", "unsupported trajectory version");
    if (row_count < 1 || param_dim < 1) throw Error("BadFormat", "bad dimensions in header");

    std::string comment;
    if (!std::getline(in, comment) || comment.size() < 2 || comment.substr(0, 2) != "# ")
        throw Error("BadFormat", "missing fingerprint line");

    Trajectory t;
    t.param_dim = param_dim;
    t.fingerprint = comment.substr(2);
    std::string line;
    for (std::size_t i = 0; i < row_count; ++i) {
        if (!std::getline(in, line)) throw Error("BadFormat", "truncated trajectory file");
        t.rows.push_back(textio::parse_row(line, param_dim, "trajectory row"));
    }
    return t;
}

}  // namespace subpt::traj
