#include "edgecl/dataset.hpp"

#include <charconv>
#include <istream>
#include <ostream>
#include <string>

#include "edgecl/error.hpp"
#include "edgecl/wire.hpp"

namespace edgecl {

namespace {

std::vector<std::string> split(const std::string &line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    out.push_back(line.substr(start, comma == std::string::npos ? std::string::npos : comma - start));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

[[noreturn]] void bad(std::size_t lineno, const std::string &msg) {
  fail(Errc::rejected_input, "line " + std::to_string(lineno) + ": " + msg);
}

double number(const std::string &s, std::size_t lineno) {
  double v = 0.0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || p != s.data() + s.size()) bad(lineno, "bad number '" + s + "'");
  return v;
}

struct Rows {
  std::vector<std::vector<std::string>> cells;
  std::vector<std::size_t> lines;
  bool has_label = false;
};

Rows read_rows(std::istream &in, const FeatureManifest &manifest, bool label_required) {
  const auto names = manifest.names();
  Rows rows;
  std::string line;
  std::size_t lineno = 0;
  bool header = true;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto cells = split(line);
    if (header) {
      header = false;
      auto expect = names;
      if (cells.size() == names.size() + 1) {
        expect.push_back("label");
        rows.has_label = true;
      }
      if (label_required && !rows.has_label) bad(lineno, "header must be the manifest slots then label");
      if (cells != expect) bad(lineno, "header does not match the manifest");
      continue;
    }
    const std::size_t want = names.size() + (rows.has_label ? 1 : 0);
    if (cells.size() != want) {
      bad(lineno, "expected " + std::to_string(want) + " columns, got " + std::to_string(cells.size()));
    }
    rows.cells.push_back(std::move(cells));
    rows.lines.push_back(lineno);
  }
  if (header) fail(Errc::rejected_input, "empty data file");
  if (rows.cells.empty()) fail(Errc::rejected_input, "data file has no rows");
  return rows;
}

FeatureVector vector_of(const std::vector<std::string> &cells, std::size_t dim, std::size_t lineno,
                        std::size_t index) {
  FeatureVector fv;
  fv.values.reserve(dim);
  for (std::size_t j = 0; j < dim; ++j) fv.values.push_back(number(cells[j], lineno));
  try {
    check_vector(fv.view(), dim);
  } catch (const Error &e) {
    bad(lineno, e.what());
  }
  fv.sample_id = "row-" + std::to_string(index);
  fv.batch_id = "file";
  return fv;
}

}  // namespace

std::vector<LabeledSample> read_labeled_csv(std::istream &in, const FeatureManifest &manifest) {
  const Rows rows = read_rows(in, manifest, true);
  std::vector<LabeledSample> out;
  out.reserve(rows.cells.size());
  for (std::size_t i = 0; i < rows.cells.size(); ++i) {
    const auto &cells = rows.cells[i];
    const std::string &label = cells.back();
    if (label != "0" && label != "1") bad(rows.lines[i], "label must be 0 or 1");
    out.push_back({vector_of(cells, manifest.dim(), rows.lines[i], i), label == "1" ? kDefective : kGood});
  }
  return out;
}

std::vector<FeatureVector> read_feature_csv(std::istream &in, const FeatureManifest &manifest) {
  const Rows rows = read_rows(in, manifest, false);
  std::vector<FeatureVector> out;
  for (std::size_t i = 0; i < rows.cells.size(); ++i) {
    out.push_back(vector_of(rows.cells[i], manifest.dim(), rows.lines[i], i));
  }
  return out;
}

void write_labeled_csv(std::ostream &out, const FeatureManifest &manifest,
                       const std::vector<LabeledSample> &samples) {
  for (const auto &n : manifest.names()) out << n << ',';
  out << "label\n";
  for (const auto &s : samples) {
    check_vector(s.features.view(), manifest.dim());
    for (double v : s.features.values) out << shortest_decimal(v) << ',';
    out << s.label << '\n';
  }
  if (!out) fail(Errc::storage, "labeled CSV write failed");
}

}  // namespace edgecl
