#pragma once

#include "frontier/ef_solver.hpp"
#include "frontier/problem.hpp"

#include <json.hpp>

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace frontier {

inline constexpr int kRecordFormatVersion = 1;

/// Exact-solver output stored with a problem.
struct SolutionLabel {
    SolveStatus status = SolveStatus::Optimal;
    Branch branch = Branch::MinVariance;
    Vector x;
    double achieved_return = 0.0;
    double achieved_vol = 0.0;
    double kkt_residual = 0.0;
    double v_min = 0.0;
};

SolutionLabel make_label(const SolverResult& result);

struct DatasetRecord {
    EfProblem problem;
    std::optional<SolutionLabel> label;
};

/// Malformed record text. `line` is 1-based, 0 when unknown.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& source, std::size_t line, const std::string& what);
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

nlohmann::ordered_json problem_to_json(const EfProblem& problem);
nlohmann::ordered_json record_to_json(const DatasetRecord& record);

/// Throws ParseError(line 0) on missing or mistyped fields.
DatasetRecord record_from_json(const nlohmann::json& j);

/// One compact JSON object, no trailing newline.
std::string record_to_line(const DatasetRecord& record);

/// Newline-delimited records; blank lines are skipped.
std::vector<DatasetRecord> read_records(std::istream& in, const std::string& source = "<stream>");
void write_records(std::ostream& out, const std::vector<DatasetRecord>& records);

std::vector<DatasetRecord> read_dataset(const std::string& path);
void write_dataset(const std::string& path, const std::vector<DatasetRecord>& records);

/// A single record that may span several lines (pretty-printed JSON).
DatasetRecord read_problem_file(const std::string& path);

Branch branch_from_string(const std::string& s);
SolveStatus status_from_string(const std::string& s);

}  // namespace frontier
