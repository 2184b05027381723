#include "edgecl/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "edgecl/error.hpp"

namespace edgecl {

namespace fs = std::filesystem;

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

[[noreturn]] void bad(int line, const std::string &msg) {
  fail(Errc::invalid_spec, "config line " + std::to_string(line) + ": " + msg);
}

bool valid_key(std::string_view k) {
  if (k.empty()) return false;
  for (char c : k) {
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-')) return false;
  }
  return true;
}

}  // namespace

KeyValueDoc KeyValueDoc::parse(std::string_view text) {
  KeyValueDoc doc;
  std::string section;
  int lineno = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? text.size() - pos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++lineno;
    line = trim(line);
    if (line.empty() || line.front() == '#') continue;

    if (line.front() == '[') {
      if (line.back() != ']') bad(lineno, "unterminated section header");
      section = std::string(trim(line.substr(1, line.size() - 2)));
      if (!valid_key(section)) bad(lineno, "bad section name");
      continue;
    }

    const auto eq = line.find('=');
    if (eq == std::string_view::npos) bad(lineno, "expected key = value");
    const std::string_view key = trim(line.substr(0, eq));
    std::string_view rest = trim(line.substr(eq + 1));
    if (!valid_key(key)) bad(lineno, "bad key");

    Value v;
    v.line = lineno;
    if (!rest.empty() && rest.front() == '"') {
      v.quoted = true;
      std::size_t i = 1;
      bool closed = false;
      for (; i < rest.size(); ++i) {
        const char c = rest[i];
        if (c == '"') {
          closed = true;
          ++i;
          break;
        }
        if (c == '\\') {
          if (++i >= rest.size()) break;
          switch (rest[i]) {
            case '"': v.text += '"'; break;
            case '\\': v.text += '\\'; break;
            case 'n': v.text += '\n'; break;
            case 't': v.text += '\t'; break;
            default: bad(lineno, "unsupported escape");
          }
          continue;
        }
        v.text += c;
      }
      if (!closed) bad(lineno, "unterminated string");
      const std::string_view tail = trim(rest.substr(i));
      if (!tail.empty() && tail.front() != '#') bad(lineno, "trailing content after string");
    } else {
      const auto hash = rest.find('#');
      v.text = std::string(trim(rest.substr(0, hash)));
      if (v.text.empty()) bad(lineno, "missing value");
    }
    const std::string full = section.empty() ? std::string(key) : section + "." + std::string(key);
    if (doc.values_.count(full)) bad(lineno, "duplicate key " + full);
    doc.values_[full] = std::move(v);
  }
  return doc;
}

const KeyValueDoc::Value *KeyValueDoc::get(const std::string &key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return nullptr;
  used_[key] = true;
  return &it->second;
}

std::optional<std::string> KeyValueDoc::string(const std::string &key) const {
  const Value *v = get(key);
  if (!v) return std::nullopt;
  if (!v->quoted) bad(v->line, key + " must be a quoted string");
  return v->text;
}

std::optional<double> KeyValueDoc::real(const std::string &key) const {
  const Value *v = get(key);
  if (!v) return std::nullopt;
  double out = 0.0;
  const auto [p, ec] = std::from_chars(v->text.data(), v->text.data() + v->text.size(), out);
  if (v->quoted || ec != std::errc() || p != v->text.data() + v->text.size()) {
    bad(v->line, key + " must be a number");
  }
  return out;
}

std::optional<std::int64_t> KeyValueDoc::integer(const std::string &key) const {
  const Value *v = get(key);
  if (!v) return std::nullopt;
  std::int64_t out = 0;
  const auto [p, ec] = std::from_chars(v->text.data(), v->text.data() + v->text.size(), out);
  if (v->quoted || ec != std::errc() || p != v->text.data() + v->text.size()) {
    bad(v->line, key + " must be an integer");
  }
  return out;
}

std::optional<bool> KeyValueDoc::boolean(const std::string &key) const {
  const Value *v = get(key);
  if (!v) return std::nullopt;
  if (!v->quoted && v->text == "true") return true;
  if (!v->quoted && v->text == "false") return false;
  bad(v->line, key + " must be true or false");
}

std::vector<std::string> KeyValueDoc::unused() const {
  std::vector<std::string> out;
  for (const auto &[k, v] : values_) {
    if (!used_.count(k)) out.push_back(k);
  }
  return out;
}

namespace {

std::size_t count_of(const KeyValueDoc &doc, const std::string &key, std::size_t fallback) {
  const auto v = doc.integer(key);
  if (!v) return fallback;
  if (*v < 0) fail(Errc::invalid_spec, key + " must be non-negative");
  return static_cast<std::size_t>(*v);
}

fs::path path_of(const KeyValueDoc &doc, const std::string &key, const fs::path &fallback,
                 const fs::path &base) {
  const auto v = doc.string(key);
  if (!v) return fallback.empty() || fallback.is_absolute() ? fallback : base / fallback;
  if (v->empty()) return {};
  const fs::path p(*v);
  return p.is_absolute() ? p : base / p;
}

}  // namespace

PipelineConfig PipelineConfig::from_text(std::string_view text, const fs::path &base_dir) {
  const KeyValueDoc doc = KeyValueDoc::parse(text);
  PipelineConfig c;
  c.registry_root = path_of(doc, "registry.root", c.registry_root, base_dir);

  c.listen = doc.string("service.listen").value_or(c.listen);
  c.log_dir = path_of(doc, "service.log_dir", c.log_dir, base_dir);
  c.alarm.threshold = doc.real("service.alarm_threshold").value_or(c.alarm.threshold);
  c.alarm.min_count = count_of(doc, "service.min_count", c.alarm.min_count);
  c.retrain_batch = count_of(doc, "service.retrain_batch", c.retrain_batch);
  c.ring_size = count_of(doc, "service.ring_size", c.ring_size);

  c.ingest_source = doc.string("ingest.source").value_or(c.ingest_source);
  if (c.ingest_source.rfind("file:", 0) == 0) {
    const fs::path p(c.ingest_source.substr(5));
    c.ingest_source = "file:" + (p.is_absolute() ? p : base_dir / p).string();
  }
  c.manifest_path = path_of(doc, "ingest.manifest", c.manifest_path, base_dir);

  auto &t = c.train;
  t.epochs = static_cast<int>(doc.integer("train.epochs").value_or(t.epochs));
  t.learning_rate = doc.real("train.learning_rate").value_or(t.learning_rate);
  t.leaf_iterations = static_cast<int>(doc.integer("train.leaf_iterations").value_or(t.leaf_iterations));
  t.rehearsal_ratio = doc.real("train.rehearsal_ratio").value_or(t.rehearsal_ratio);
  t.noise_scale = doc.real("train.noise_scale").value_or(t.noise_scale);
  t.leaf_smoothing = doc.real("train.leaf_smoothing").value_or(t.leaf_smoothing);
  t.batch_size = count_of(doc, "train.batch_size", t.batch_size);
  t.seed = count_of(doc, "train.seed", t.seed);
  c.shape.trees = count_of(doc, "train.trees", c.shape.trees);
  c.shape.depth = static_cast<int>(count_of(doc, "train.depth", static_cast<std::size_t>(c.shape.depth)));
  c.ilvq.capacity = count_of(doc, "train.capacity", c.ilvq.capacity);
  c.ilvq.kappa = doc.real("train.kappa").value_or(c.ilvq.kappa);

  c.grid_path = path_of(doc, "optimizer.grid", c.grid_path, base_dir);
  c.grid_points = count_of(doc, "optimizer.points", c.grid_points);

  c.labels_path = path_of(doc, "simulate.labels", c.labels_path, base_dir);
  c.speedup = doc.real("simulate.speedup").value_or(c.speedup);
  c.sim_seed = count_of(doc, "simulate.seed", c.sim_seed);

  const auto unused = doc.unused();
  if (!unused.empty()) fail(Errc::invalid_spec, "unknown config key " + unused.front());
  c.validate();
  return c;
}

PipelineConfig PipelineConfig::load(const fs::path &file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) fail(Errc::invalid_spec, "cannot read config " + file.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return from_text(buf.str(), file.parent_path());
}

FeatureManifest PipelineConfig::manifest() const {
  if (manifest_path.empty()) return FeatureManifest::default_manifest();
  std::ifstream in(manifest_path, std::ios::binary);
  if (!in) fail(Errc::invalid_spec, "cannot read manifest " + manifest_path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return FeatureManifest::parse(buf.str());
}

void PipelineConfig::validate() const {
  try {
    train.validate();
    alarm.validate();
  } catch (const Error &e) {
    fail(Errc::invalid_spec, e.what());
  }
  parse_endpoint(listen);
  if (ingest_source.rfind("tcp://", 0) == 0) {
    parse_endpoint(std::string_view(ingest_source).substr(6));
  } else if (ingest_source.rfind("file:", 0) != 0 || ingest_source.size() == 5) {
    fail(Errc::invalid_spec, "ingest.source must be tcp://host:port or file:<path>");
  }
  if (retrain_batch < 1) fail(Errc::invalid_spec, "service.retrain_batch must be >= 1");
  if (ring_size < 1) fail(Errc::invalid_spec, "service.ring_size must be >= 1");
  if (shape.trees < 1 || shape.depth < 0 || shape.depth > 12) fail(Errc::invalid_spec, "train.trees >= 1 and train.depth <= 12");
  if (ilvq.capacity < 2 || !(ilvq.kappa > 0.0)) fail(Errc::invalid_spec, "train.capacity >= 2 and train.kappa > 0");
  if (grid_points < 1) fail(Errc::invalid_spec, "optimizer.points must be >= 1");
  if (!(speedup > 0.0)) fail(Errc::invalid_spec, "simulate.speedup must be > 0");
  if (registry_root.empty()) fail(Errc::invalid_spec, "registry.root is required");
}

Endpoint parse_endpoint(std::string_view text) {
  const auto colon = text.rfind(':');
  if (colon == std::string_view::npos || colon == 0) {
    fail(Errc::invalid_spec, "expected host:port, got '" + std::string(text) + "'");
  }
  Endpoint e;
  e.host = std::string(text.substr(0, colon));
  const auto port = text.substr(colon + 1);
  const auto [p, ec] = std::from_chars(port.data(), port.data() + port.size(), e.port);
  if (ec != std::errc() || p != port.data() + port.size() || e.port < 0 || e.port > 65535) {
    fail(Errc::invalid_spec, "bad port in '" + std::string(text) + "'");
  }
  return e;
}

}  // namespace edgecl
