#include "edgecl/model_io.hpp"

#include <charconv>
#include <cstdio>
#include <sstream>
#include <vector>

#include "edgecl/error.hpp"

namespace edgecl {

namespace {

constexpr std::string_view kHeader = "TRIL3-MODEL 1";

void put_reals(std::string &out, std::span<const double> values) {
  for (double v : values) {
    out += ' ';
    out += format_real(v);
  }
}

[[noreturn]] void bad(const std::string &what) {
  fail(Errc::rejected_input, "model text: " + what);
}

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && line[i] == ' ') ++i;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ') ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

double to_real(std::string_view tok) {
  double v = 0.0;
  const auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc{} || p != tok.data() + tok.size()) bad("bad real '" + std::string(tok) + "'");
  return v;
}

std::uint64_t to_uint(std::string_view tok) {
  std::uint64_t v = 0;
  const auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc{} || p != tok.data() + tok.size()) {
    bad("bad integer '" + std::string(tok) + "'");
  }
  return v;
}

class LineReader {
 public:
  explicit LineReader(std::string_view text) : text_(text) {}

  bool next(std::string_view &line) {
    while (pos_ < text_.size()) {
      const auto end = text_.find('\n', pos_);
      const auto stop = end == std::string_view::npos ? text_.size() : end;
      line = text_.substr(pos_, stop - pos_);
      pos_ = stop + 1;
      if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
      if (!line.empty()) return true;
    }
    return false;
  }

  std::vector<std::string_view> expect(std::string_view key, std::size_t min_tokens) {
    std::string_view line;
    if (!next(line)) bad("unexpected end, wanted '" + std::string(key) + "'");
    auto toks = split_ws(line);
    if (toks.empty() || toks[0] != key || toks.size() < min_tokens) {
      bad("expected '" + std::string(key) + "', got '" + std::string(line) + "'");
    }
    return toks;
  }

  void expect_exact(std::string_view wanted) {
    std::string_view line;
    if (!next(line) || line != wanted) bad("expected '" + std::string(wanted) + "'");
  }

 private:
  std::string_view text_;
  std::size_t pos_ = 0;
};

std::vector<double> reals_from(const std::vector<std::string_view> &toks, std::size_t first,
                               std::size_t count) {
  if (toks.size() != first + count) bad("wrong number of values");
  std::vector<double> out;
  out.reserve(count);
  for (std::size_t i = first; i < toks.size(); ++i) out.push_back(to_real(toks[i]));
  return out;
}

}  // namespace

std::string format_real(double v) {
  char buf[40];
  const int n = std::snprintf(buf, sizeof buf, "%.16e", v);
  return {buf, static_cast<std::size_t>(n)};
}

std::string serialize_model(const Model &model) {
  const Forest &f = model.forest;
  const std::size_t d = f.dim;
  std::string out;
  out += kHeader;
  out += "\n[meta]\n";
  out += "d " + std::to_string(d) + "\n";
  out += "T " + std::to_string(f.trees.size()) + "\n";
  out += "D " + std::to_string(f.trees.empty() ? 0 : f.trees.front().depth) + "\n";
  out += "version " + std::to_string(f.version) + "\n";
  out += "seed " + std::to_string(f.seed) + "\n";
  out += "slots";
  for (const auto &s : model.slots) out += " " + s;
  out += "\n[scaler]\nmean";
  put_reals(out, model.scaler.mean);
  out += "\nscale";
  put_reals(out, model.scaler.scale);
  out += '\n';

  for (std::size_t t = 0; t < f.trees.size(); ++t) {
    const SoftTree &tree = f.trees[t];
    out += "[tree " + std::to_string(t) + "]\n";
    for (std::size_t n = 0; n < tree.internal_count(); ++n) {
      out += "node " + std::to_string(n);
      put_reals(out, std::span<const double>(tree.weights).subspan(n * d, d));
      out += ' ' + format_real(tree.biases[n]) + '\n';
    }
    for (std::size_t l = 0; l < tree.leaf_count(); ++l) {
      out += "leaf " + std::to_string(l);
      put_reals(out, tree.leaves[l]);
      out += '\n';
    }
  }

  const PrototypeMemory &m = model.memory;
  out += "[ilvq]\n";
  out += "capacity " + std::to_string(m.params().capacity) + "\n";
  out += "kappa " + format_real(m.params().kappa) + "\n";
  out += "step " + std::to_string(m.step()) + "\n";
  out += "stats " + std::to_string(m.stats().count()) + "\n";
  out += "stats_mean";
  put_reals(out, m.stats().mean());
  out += "\nstats_m2";
  put_reals(out, m.stats().m2());
  out += "\nprototypes " + std::to_string(m.size()) + "\n";
  for (const auto &p : m.prototypes()) {
    out += "proto " + std::to_string(p.label) + " " + std::to_string(p.wins) + " " +
           std::to_string(p.created_at);
    put_reals(out, p.w);
    out += '\n';
  }
  return out;
}

Model deserialize_model(std::string_view text) {
  LineReader in(text);
  in.expect_exact(kHeader);
  in.expect_exact("[meta]");
  const std::size_t d = to_uint(in.expect("d", 2)[1]);
  const std::size_t trees = to_uint(in.expect("T", 2)[1]);
  const auto depth = static_cast<int>(to_uint(in.expect("D", 2)[1]));
  if (d == 0 || trees == 0 || depth > 20) bad("bad forest shape");

  Model model;
  model.forest.dim = d;
  model.forest.version = to_uint(in.expect("version", 2)[1]);
  model.forest.seed = to_uint(in.expect("seed", 2)[1]);
  const auto slot_toks = in.expect("slots", 1);
  for (std::size_t i = 1; i < slot_toks.size(); ++i) model.slots.emplace_back(slot_toks[i]);
  if (!model.slots.empty() && model.slots.size() != d) bad("slot count does not match d");

  in.expect_exact("[scaler]");
  model.scaler.mean = reals_from(in.expect("mean", 1), 1, d);
  model.scaler.scale = reals_from(in.expect("scale", 1), 1, d);

  for (std::size_t t = 0; t < trees; ++t) {
    in.expect_exact("[tree " + std::to_string(t) + "]");
    SoftTree tree = make_tree(d, depth);
    for (std::size_t n = 0; n < tree.internal_count(); ++n) {
      const auto toks = in.expect("node", 2);
      if (to_uint(toks[1]) != n) bad("node index out of order");
      const auto vals = reals_from(toks, 2, d + 1);
      std::copy(vals.begin(), vals.end() - 1,
                tree.weights.begin() + static_cast<std::ptrdiff_t>(n * d));
      tree.biases[n] = vals.back();
    }
    for (std::size_t l = 0; l < tree.leaf_count(); ++l) {
      const auto toks = in.expect("leaf", 2);
      if (to_uint(toks[1]) != l) bad("leaf index out of order");
      const auto vals = reals_from(toks, 2, 2);
      if (vals[0] < 0.0 || vals[1] < 0.0) bad("negative leaf probability");
      tree.leaves[l] = {vals[0], vals[1]};
    }
    model.forest.trees.push_back(std::move(tree));
  }

  in.expect_exact("[ilvq]");
  IlvqParams params;
  params.capacity = to_uint(in.expect("capacity", 2)[1]);
  params.kappa = to_real(in.expect("kappa", 2)[1]);
  const std::uint64_t step = to_uint(in.expect("step", 2)[1]);
  const std::uint64_t count = to_uint(in.expect("stats", 2)[1]);
  auto mean = reals_from(in.expect("stats_mean", 1), 1, d);
  auto m2 = reals_from(in.expect("stats_m2", 1), 1, d);
  const std::size_t n_protos = to_uint(in.expect("prototypes", 2)[1]);
  std::vector<Prototype> protos;
  for (std::size_t i = 0; i < n_protos; ++i) {
    const auto toks = in.expect("proto", 4);
    Prototype p;
    p.label = static_cast<int>(to_uint(toks[1]));
    p.wins = to_uint(toks[2]);
    p.created_at = to_uint(toks[3]);
    p.w = reals_from(toks, 4, d);
    protos.push_back(std::move(p));
  }
  model.memory = PrototypeMemory::restore(d, params, std::move(protos),
                                          RunningStats(count, std::move(mean), std::move(m2)),
                                          step);
  std::string_view extra;
  if (in.next(extra)) bad("trailing content '" + std::string(extra) + "'");
  return model;
}

std::uint64_t model_version_of(std::string_view text) {
  LineReader in(text);
  in.expect_exact(kHeader);
  in.expect_exact("[meta]");
  in.expect("d", 2);
  in.expect("T", 2);
  in.expect("D", 2);
  return to_uint(in.expect("version", 2)[1]);
}

}  // namespace edgecl
