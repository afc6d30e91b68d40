#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "ckm/errors.hpp"
#include "ckm/lab.hpp"

namespace ckm::lab {

namespace {

std::vector<std::string> split_line(const std::string &line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) {
        out.push_back(cell);
    }
    if (!line.empty() && line.back() == ',') {
        out.emplace_back();
    }
    return out;
}

json optional_number(const std::optional<double> &v) {
    if (v && std::isfinite(*v)) {
        return *v;
    }
    return nullptr;
}

} // namespace

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_csv(const std::filesystem::path &path, const std::vector<std::string> &header,
               const std::vector<std::vector<double>> &rows) {
    std::ofstream out(path);
    if (!out) {
        throw Error("cannot write " + path.string());
    }
    for (std::size_t i = 0; i < header.size(); ++i) {
        out << (i ? "," : "") << header[i];
    }
    out << '\n';
    for (const auto &row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            out << (i ? "," : "") << format_double(row[i]);
        }
        out << '\n';
    }
    if (!out) {
        throw Error("write failed for " + path.string());
    }
}

CsvTable read_csv(const std::filesystem::path &path) {
    std::ifstream in(path);
    if (!in) {
        throw InvalidInput("cannot open " + path.string());
    }
    CsvTable table;
    std::string line;
    if (!std::getline(in, line)) {
        throw InvalidInput(path.string() + " is empty");
    }
    if (!line.empty() && line.back() == '\r') {
        line.pop_back();
    }
    table.header = split_line(line);
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty()) {
            continue;
        }
        const auto cells = split_line(line);
        if (cells.size() != table.header.size()) {
            throw InvalidInput(path.string() + ":" + std::to_string(lineno) + ": expected " +
                               std::to_string(table.header.size()) + " columns, found " + std::to_string(cells.size()));
        }
        std::vector<double> row(cells.size());
        for (std::size_t i = 0; i < cells.size(); ++i) {
            const char *s = cells[i].c_str();
            char *end = nullptr;
            errno = 0;
            row[i] = std::strtod(s, &end);
            if (end == s || *end != '\0') {
                throw InvalidInput(path.string() + ":" + std::to_string(lineno) + ": column '" + table.header[i] +
                                   "' is not a number");
            }
        }
        table.rows.push_back(std::move(row));
    }
    return table;
}

void write_trajectory_csv(const std::filesystem::path &path, const ode::Trajectory &traj) {
    if (traj.size() == 0) {
        throw InvalidInput("empty trajectory");
    }
    const std::size_t dim = traj.states.front().size();
    std::vector<std::string> header{"t"};
    if (dim == 2) {
        header.insert(header.end(), {"x", "y"});
    } else {
        const std::size_t n = dim / 2;
        for (std::size_t i = 1; i <= n; ++i) {
            header.push_back("x_" + std::to_string(i));
        }
        for (std::size_t i = 1; i <= n; ++i) {
            header.push_back("y_" + std::to_string(i));
        }
    }
    std::vector<std::vector<double>> rows;
    rows.reserve(traj.size());
    for (std::size_t k = 0; k < traj.size(); ++k) {
        std::vector<double> row{traj.times[k]};
        row.insert(row.end(), traj.states[k].begin(), traj.states[k].end());
        rows.push_back(std::move(row));
    }
    write_csv(path, header, rows);
}

ode::Trajectory read_trajectory_csv(const std::filesystem::path &path) {
    const auto table = read_csv(path);
    if (table.header.empty() || table.header.front() != "t") {
        throw InvalidInput(path.string() + ": first column must be 't'");
    }
    const std::size_t dim = table.header.size() - 1;
    if (dim < 2 || dim % 2 != 0) {
        throw InvalidInput(path.string() + ": expected t followed by x and y columns");
    }
    const std::size_t n = dim / 2;
    for (std::size_t i = 0; i < n && n > 1; ++i) {
        if (table.header[1 + i] != "x_" + std::to_string(i + 1) ||
            table.header[1 + n + i] != "y_" + std::to_string(i + 1)) {
            throw InvalidInput(path.string() + ": unexpected column '" + table.header[1 + i] + "'");
        }
    }
    ode::Trajectory traj;
    for (const auto &row : table.rows) {
        if (!traj.times.empty() && !(row[0] > traj.times.back())) {
            throw InvalidInput(path.string() + ": column 't' must be strictly increasing");
        }
        traj.times.push_back(row[0]);
        traj.states.emplace_back(row.begin() + 1, row.end());
    }
    if (traj.times.empty()) {
        throw InvalidInput(path.string() + " has no rows");
    }
    traj.termination = {ode::Status::completed, traj.times.back()};
    return traj;
}

json to_json(const SyncReport &r) {
    return {{"full_phase_locking", r.full_phase_locking},
            {"frequency_sync", r.frequency_sync},
            {"phase_sync", r.phase_sync},
            {"max_pair_z_gap_tail", r.max_pair_z_gap_tail},
            {"max_pair_zdot_gap_tail", r.max_pair_zdot_gap_tail},
            {"final_pair_z_gap", r.final_pair_z_gap},
            {"final_pair_zdot_gap", r.final_pair_zdot_gap},
            {"real_spread_max", r.real_spread_max},
            {"imag_spread_max", r.imag_spread_max},
            {"fitted_Y_decay_rate", optional_number(r.fitted_Y_decay_rate)},
            {"H_final", r.H_final}};
}

SyncReport sync_report_from_json(const json &j) {
    SyncReport r;
    r.full_phase_locking = j.at("full_phase_locking").get<bool>();
    r.frequency_sync = j.at("frequency_sync").get<bool>();
    r.phase_sync = j.at("phase_sync").get<bool>();
    r.max_pair_z_gap_tail = j.at("max_pair_z_gap_tail").get<double>();
    r.max_pair_zdot_gap_tail = j.at("max_pair_zdot_gap_tail").get<double>();
    r.final_pair_z_gap = j.at("final_pair_z_gap").get<double>();
    r.final_pair_zdot_gap = j.at("final_pair_zdot_gap").get<double>();
    r.real_spread_max = j.at("real_spread_max").get<double>();
    r.imag_spread_max = j.at("imag_spread_max").get<double>();
    if (!j.at("fitted_Y_decay_rate").is_null()) {
        r.fitted_Y_decay_rate = j.at("fitted_Y_decay_rate").get<double>();
    }
    r.H_final = j.at("H_final").get<double>();
    return r;
}

json to_json(const cherry::EquilibriumRecord &r) {
    return {{"x", r.x},
            {"y", r.y},
            {"residual", r.residual},
            {"linearization", r.linearization},
            {"stability", cherry::to_string(r.stability)},
            {"bracket", {r.bracket.first, r.bracket.second}}};
}

} // namespace ckm::lab
