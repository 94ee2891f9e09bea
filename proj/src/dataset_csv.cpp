#include "gradlore/csv.hpp"
#include "gradlore/error.hpp"
#include "gradlore/processes.hpp"

#include <istream>
#include <ostream>
#include <string>

namespace gradlore {

void write_dataset_csv(std::ostream& os, const GiBatch& batch) {
  const std::size_t d_in = batch.input_dim();
  const std::size_t d_out = batch.output_dim();
  std::string sep;
  for (std::size_t j = 0; j < d_in; ++j, sep = ",") os << sep << 'x' << j;
  for (std::size_t o = 0; o < d_out; ++o) os << ",z" << o;
  for (std::size_t o = 0; o < d_out; ++o)
    for (std::size_t j = 0; j < d_in; ++j) os << ",g" << o << '_' << j;
  os << '\n';
  for (std::size_t i = 0; i < batch.size(); ++i) {
    sep.clear();
    for (double v : batch.x(i)) os << sep << csv::format(v), sep = ",";
    for (double v : batch.z(i)) os << ',' << csv::format(v);
    for (double v : batch.grad(i)) os << ',' << csv::format(v);
    os << '\n';
  }
}

GiBatch read_dataset_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw Error(ErrorCode::TruncatedFile, "read_dataset_csv: missing header");
  const auto header = csv::split(line);
  std::size_t d_in = 0, d_out = 0, n_grad = 0;
  for (const auto& h : header) {
    if (h.empty()) throw Error(ErrorCode::BadParams, "read_dataset_csv: empty column name");
    switch (h.front()) {
      case 'x': ++d_in; break;
      case 'z': ++d_out; break;
      case 'g': ++n_grad; break;
      default: throw Error(ErrorCode::BadParams, "read_dataset_csv: unexpected column '" + h + "'");
    }
  }
  if (n_grad != d_in * d_out)
    throw Error(ErrorCode::ShapeMismatch, "read_dataset_csv: gradient columns must number d_in * d_out");

  std::vector<std::vector<double>> rows;
  while (std::getline(is, line)) {
    if (line.empty() || line == "\r") continue;
    const auto cells = csv::split(line);
    if (cells.size() != header.size())
      throw Error(ErrorCode::ShapeMismatch, "read_dataset_csv: row width differs from header");
    std::vector<double> row;
    row.reserve(cells.size());
    for (const auto& c : cells) row.push_back(csv::parse_double(c));
    rows.push_back(std::move(row));
  }
  GiBatch batch{Matrix(rows.size(), d_in), Matrix(rows.size(), d_out), Matrix(rows.size(), n_grad)};
  for (std::size_t i = 0; i < rows.size(); ++i) {
    std::size_t c = 0;
    for (std::size_t j = 0; j < d_in; ++j) batch.inputs(i, j) = rows[i][c++];
    for (std::size_t o = 0; o < d_out; ++o) batch.targets(i, o) = rows[i][c++];
    for (std::size_t g = 0; g < n_grad; ++g) batch.target_grads(i, g) = rows[i][c++];
  }
  batch.validate();
  return batch;
}

}  // namespace gradlore
