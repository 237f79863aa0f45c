#include "frontier/record_io.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace frontier {

namespace {

using ordered = nlohmann::ordered_json;

ordered vec_json(const Vector& v) {
    ordered a = ordered::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        a.push_back(v[i]);
    }
    return a;
}

ordered mat_json(const Matrix& m) {
    ordered a = ordered::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        a.push_back(vec_json(m.row(r).transpose()));
    }
    return a;
}

[[noreturn]] void fail(const std::string& what) { throw ParseError("record", 0, what); }

const nlohmann::json& field(const nlohmann::json& j, const char* name) {
    const auto it = j.find(name);
    if (it == j.end()) {
        fail(std::string("missing field '") + name + "'");
    }
    return *it;
}

double number(const nlohmann::json& j, const char* name) {
    const auto& f = field(j, name);
    if (!f.is_number()) {
        fail(std::string("field '") + name + "' is not a number");
    }
    return f.get<double>();
}

Vector vec_from(const nlohmann::json& j, const char* name) {
    const auto& f = field(j, name);
    if (!f.is_array()) {
        fail(std::string("field '") + name + "' is not an array");
    }
    Vector v(static_cast<Eigen::Index>(f.size()));
    for (std::size_t i = 0; i < f.size(); ++i) {
        if (!f[i].is_number()) {
            fail(std::string("field '") + name + "' has a non-numeric entry");
        }
        v[static_cast<Eigen::Index>(i)] = f[i].get<double>();
    }
    return v;
}

Matrix mat_from(const nlohmann::json& j, const char* name) {
    const auto& f = field(j, name);
    if (!f.is_array()) {
        fail(std::string("field '") + name + "' is not an array");
    }
    const std::size_t rows = f.size();
    Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(rows));
    for (std::size_t r = 0; r < rows; ++r) {
        if (!f[r].is_array() || f[r].size() != rows) {
            fail(std::string("field '") + name + "' is not a square matrix");
        }
        for (std::size_t c = 0; c < rows; ++c) {
            if (!f[r][c].is_number()) {
                fail(std::string("field '") + name + "' has a non-numeric entry");
            }
            m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = f[r][c].get<double>();
        }
    }
    return m;
}

std::size_t line_of_offset(const std::string& text, std::size_t offset) {
    offset = std::min(offset, text.size());
    return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(offset), '\n'));
}

}  // namespace

ParseError::ParseError(const std::string& source, std::size_t line, const std::string& what)
    : std::runtime_error(source + (line ? ":" + std::to_string(line) : std::string()) + ": " + what), line_(line) {}

SolutionLabel make_label(const SolverResult& r) {
    return {r.status, r.branch, r.allocation.x, r.allocation.achieved_return, r.allocation.achieved_vol,
            r.kkt_residual, r.v_min};
}

Branch branch_from_string(const std::string& s) {
    if (s == to_string(Branch::MinVariance)) {
        return Branch::MinVariance;
    }
    if (s == to_string(Branch::MaxReturn)) {
        return Branch::MaxReturn;
    }
    fail("unknown branch '" + s + "'");
}

SolveStatus status_from_string(const std::string& s) {
    for (auto st : {SolveStatus::Optimal, SolveStatus::Infeasible, SolveStatus::NumericalFailure}) {
        if (s == to_string(st)) {
            return st;
        }
    }
    fail("unknown status '" + s + "'");
}

ordered problem_to_json(const EfProblem& p) {
    ordered j;
    j["format_version"] = kRecordFormatVersion;
    j["n"] = p.size();
    j["returns"] = vec_json(p.returns);
    j["vols"] = vec_json(p.vols);
    j["corr"] = mat_json(p.corr);
    j["x_min"] = vec_json(p.x_min);
    j["x_max"] = vec_json(p.x_max);
    j["classes"] = p.classes;
    j["zeta_max"] = vec_json(p.zeta_max);
    j["alpha_min"] = p.alpha_min;
    j["alpha_max"] = p.alpha_max;
    j["v_target"] = p.v_target;
    return j;
}

ordered record_to_json(const DatasetRecord& rec) {
    ordered j = problem_to_json(rec.problem);
    if (rec.label) {
        const auto& l = *rec.label;
        ordered lj;
        lj["status"] = to_string(l.status);
        lj["branch"] = to_string(l.branch);
        lj["x"] = vec_json(l.x);
        lj["achieved_return"] = l.achieved_return;
        lj["achieved_vol"] = l.achieved_vol;
        lj["kkt_residual"] = l.kkt_residual;
        lj["v_min"] = l.v_min;
        j["label"] = std::move(lj);
    }
    return j;
}

DatasetRecord record_from_json(const nlohmann::json& j) {
    if (!j.is_object()) {
        fail("record is not a JSON object");
    }
    if (j.contains("format_version") && j["format_version"] != kRecordFormatVersion) {
        fail("unsupported record format version");
    }
    DatasetRecord rec;
    EfProblem& p = rec.problem;
    p.returns = vec_from(j, "returns");
    const auto n = p.returns.size();
    p.vols = vec_from(j, "vols");
    p.corr = mat_from(j, "corr");
    p.x_min = j.contains("x_min") ? vec_from(j, "x_min") : Vector::Zero(n);
    p.x_max = j.contains("x_max") ? vec_from(j, "x_max") : Vector::Ones(n);
    if (j.contains("classes")) {
        const auto& c = j["classes"];
        if (!c.is_array()) {
            fail("field 'classes' is not an array");
        }
        for (const auto& v : c) {
            if (!v.is_number_integer()) {
                fail("field 'classes' has a non-integer entry");
            }
            p.classes.push_back(v.get<int>());
        }
    }
    p.zeta_max = j.contains("zeta_max") ? vec_from(j, "zeta_max") : Vector();
    p.alpha_min = number(j, "alpha_min");
    p.alpha_max = number(j, "alpha_max");
    p.v_target = number(j, "v_target");
    if (j.contains("n") && j["n"] != static_cast<std::size_t>(n)) {
        fail("field 'n' disagrees with the length of 'returns'");
    }
    if (j.contains("label")) {
        const auto& lj = j["label"];
        SolutionLabel l;
        l.status = status_from_string(field(lj, "status").get<std::string>());
        l.branch = branch_from_string(field(lj, "branch").get<std::string>());
        l.x = vec_from(lj, "x");
        l.achieved_return = number(lj, "achieved_return");
        l.achieved_vol = number(lj, "achieved_vol");
        l.kkt_residual = number(lj, "kkt_residual");
        l.v_min = number(lj, "v_min");
        rec.label = std::move(l);
    }
    return rec;
}

std::string record_to_line(const DatasetRecord& record) { return record_to_json(record).dump(); }

std::vector<DatasetRecord> read_records(std::istream& in, const std::string& source) {
    std::vector<DatasetRecord> out;
    std::string line;
    std::size_t number = 0;
    while (std::getline(in, line)) {
        ++number;
        if (line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        try {
            out.push_back(record_from_json(nlohmann::json::parse(line)));
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(source, number, e.what());
        } catch (const ParseError& e) {
            throw ParseError(source, number, e.what());
        }
    }
    return out;
}

void write_records(std::ostream& out, const std::vector<DatasetRecord>& records) {
    for (const auto& r : records) {
        out << record_to_line(r) << '\n';
    }
}

std::vector<DatasetRecord> read_dataset(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open '" + path + "'");
    }
    return read_records(in, path);
}

void write_dataset(const std::string& path, const std::vector<DatasetRecord>& records) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot open '" + path + "' for writing");
    }
    write_records(out, records);
    if (!out) {
        throw std::runtime_error("write to '" + path + "' failed");
    }
}

DatasetRecord read_problem_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open '" + path + "'");
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    const std::string text = ss.str();
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(path, line_of_offset(text, e.byte), e.what());
    }
    try {
        return record_from_json(j);
    } catch (const ParseError& e) {
        throw ParseError(path, 0, e.what());
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(path, 0, e.what());
    }
}

}  // namespace frontier
