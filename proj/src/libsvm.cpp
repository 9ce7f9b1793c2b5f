#include "svogs/libsvm.hpp"

#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <istream>
#include <sstream>
#include <vector>

namespace svogs {

namespace {

[[noreturn]] void fail_line(std::size_t line_no, const std::string& what) {
  std::ostringstream os;
  os << "malformed input at line " << line_no << ": " << what;
  throw InvalidArgument(os.str());
}

double parse_number(const std::string& tok, std::size_t line_no) {
  const char* begin = tok.c_str();
  char* end = nullptr;
  const double v = std::strtod(begin, &end);
  if (end == begin || *end != '\0')
    fail_line(line_no, "non-numeric token '" + tok + "'");
  return v;
}

}  // namespace

RegressionData parse_libsvm(std::istream& in, Index dim_override) {
  struct SparseRow {
    double label = 0.0;
    std::vector<std::pair<Index, double>> entries;
  };
  std::vector<SparseRow> rows;
  Index max_index = 0;

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos)
      line.resize(hash);
    std::istringstream tokens(line);
    std::string tok;
    if (!(tokens >> tok)) continue;  // blank or comment-only line

    SparseRow row;
    row.label = parse_number(tok, line_no);
    Index prev = 0;
    while (tokens >> tok) {
      const auto colon = tok.find(':');
      if (colon == std::string::npos || colon == 0 || colon + 1 == tok.size())
        fail_line(line_no, "expected index:value, got '" + tok + "'");
      const double idx_raw = parse_number(tok.substr(0, colon), line_no);
      const Index idx = static_cast<Index>(idx_raw);
      if (idx_raw != static_cast<double>(idx) || idx < 1)
        fail_line(line_no, "indices must be positive integers");
      if (idx <= prev) fail_line(line_no, "indices must be strictly increasing");
      prev = idx;
      max_index = std::max(max_index, idx);
      row.entries.emplace_back(idx, parse_number(tok.substr(colon + 1), line_no));
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw InvalidArgument("input contains no samples");

  const Index dim = std::max(max_index, dim_override);
  RegressionData data;
  data.A = Matrix::Zero(static_cast<Index>(rows.size()), dim);
  data.b = Vector::Zero(static_cast<Index>(rows.size()));
  for (Index r = 0; r < static_cast<Index>(rows.size()); ++r) {
    data.b[r] = rows[r].label;
    for (const auto& [idx, value] : rows[r].entries)
      data.A(r, idx - 1) = value;
  }
  return data;
}

RegressionData parse_libsvm_file(const std::string& path, Index dim_override) {
  std::ifstream in(path);
  detail::require(in.good(), "cannot open '" + path + "'");
  return parse_libsvm(in, dim_override);
}

void serialize_libsvm(const RegressionData& data, std::ostream& out) {
  out << std::setprecision(17);
  for (Index r = 0; r < data.rows(); ++r) {
    out << data.b[r];
    for (Index c = 0; c < data.cols(); ++c)
      if (data.A(r, c) != 0.0) out << ' ' << (c + 1) << ':' << data.A(r, c);
    out << '\n';
  }
}

}  // namespace svogs
