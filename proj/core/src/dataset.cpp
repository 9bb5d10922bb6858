#include "netfx/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>

#include "netfx/errors.hpp"

namespace netfx {
namespace {

std::vector<ObservationRecord> validated(std::vector<ObservationRecord> records, int horizon, int width) {
  if (records.empty()) throw UsageError("dataset must contain at least one record");
  if (horizon < 1) throw UsageError("horizon must be at least 1");
  if (width < 0 || (horizon > 1 && width < 1)) throw UsageError("covariate width must be positive when T > 1");
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    const std::string where = "record " + std::to_string(i + 1) + " (" + r.unit_id + ")";
    if (static_cast<int>(r.treatments.size()) != horizon) {
      throw UsageError(where + ": expected " + std::to_string(horizon) + " treatments");
    }
    if (static_cast<int>(r.covariates.size()) != horizon - 1) {
      throw UsageError(where + ": expected " + std::to_string(horizon - 1) + " covariate vectors");
    }
    for (int z : r.treatments) {
      if (z < 0) throw DomainError(where + ": negative treatment code " + std::to_string(z));
    }
    for (const auto& x : r.covariates) {
      if (static_cast<int>(x.size()) != width) {
        throw UsageError(where + ": covariate vector width " + std::to_string(x.size()) + ", expected " +
                         std::to_string(width));
      }
      for (int c : x) {
        if (c < 0) throw DomainError(where + ": negative covariate code " + std::to_string(c));
      }
    }
    if (!std::isfinite(r.outcome)) throw DomainError(where + ": non-finite outcome");
  }
  return records;
}

CovariateCodec codec_for(const std::vector<ObservationRecord>& records, int width) {
  std::vector<int> radices(static_cast<std::size_t>(width), 1);
  for (const auto& r : records) {
    for (const auto& x : r.covariates) {
      for (std::size_t c = 0; c < x.size(); ++c) radices[c] = std::max(radices[c], x[c] + 1);
    }
  }
  return CovariateCodec(std::move(radices));
}

}  // namespace

Dataset::Dataset(std::vector<ObservationRecord> records, int horizon, int covariate_width)
    : records_(validated(std::move(records), horizon, covariate_width)),
      horizon_(horizon),
      width_(horizon > 1 ? covariate_width : 0),
      treatment_levels_(static_cast<std::size_t>(horizon)),
      covariate_levels_(static_cast<std::size_t>(horizon - 1)),
      tree_(horizon, codec_for(records_, width_), StratumTree::Source::empirical) {
  leaf_of_.reserve(records_.size());
  for (std::size_t i = 0; i < records_.size(); ++i) {
    const auto& r = records_[i];
    for (int t = 0; t < horizon_; ++t) treatment_levels_[static_cast<std::size_t>(t)].insert(r.treatments[static_cast<std::size_t>(t)]);
    for (int t = 0; t + 1 < horizon_; ++t) covariate_levels_[static_cast<std::size_t>(t)].insert(r.covariates[static_cast<std::size_t>(t)]);
    leaf_of_.push_back(tree_.insert_path(history_of(i).steps));
  }
  tree_.finalize();

  members_.assign(tree_.size(), {});
  for (std::size_t i = 0; i < records_.size(); ++i) {
    for (int id = leaf_of_[i]; id != -1; id = tree_.node(id).parent) members_[static_cast<std::size_t>(id)].push_back(i);
  }
  for (std::size_t id = 0; id < tree_.size(); ++id) {
    auto& node = tree_.mutable_node(static_cast<int>(id));
    const auto& idx = members_[id];
    double sum = 0.0;
    for (auto i : idx) sum += records_[i].outcome;
    node.count = static_cast<std::int64_t>(idx.size());
    node.weight = static_cast<double>(idx.size());
    node.mean = sum / static_cast<double>(idx.size());
    double ss = 0.0;
    for (auto i : idx) {
      const double d = records_[i].outcome - node.mean;
      ss += d * d;
    }
    node.sum_sq_dev = ss;
  }
}

StratumKey Dataset::history_of(std::size_t i) const {
  const auto& r = records_.at(i);
  StratumKey key;
  key.steps.reserve(static_cast<std::size_t>(2 * horizon_ - 1));
  for (int t = 0; t < horizon_; ++t) {
    key.steps.push_back(r.treatments[static_cast<std::size_t>(t)]);
    if (t + 1 < horizon_) key.steps.push_back(tree_.codec().encode(r.covariates[static_cast<std::size_t>(t)]));
  }
  return key;
}

std::vector<std::size_t> Dataset::stratum_members(const StratumKey& key) const {
  if (static_cast<int>(key.size()) > tree_.history_length()) {
    throw UsageError("stratum key deeper than the dataset horizon");
  }
  auto id = tree_.find(key);
  if (!id) return {};
  return members_[static_cast<std::size_t>(*id)];
}

StratumKey Dataset::make_key(const std::vector<int>& treatments, const std::vector<std::vector<int>>& covariates) const {
  if (treatments.size() != covariates.size() && treatments.size() != covariates.size() + 1) {
    throw UsageError("inconsistent key: treatments and covariates lengths do not interleave");
  }
  StratumKey key;
  for (std::size_t t = 0; t < treatments.size(); ++t) {
    key.steps.push_back(treatments[t]);
    if (t < covariates.size()) {
      const auto& x = covariates[t];
      // Codes beyond the observed alphabet cannot match any record; map them to
      // a symbol no node carries.
      bool outside = static_cast<int>(x.size()) != width_;
      for (std::size_t c = 0; !outside && c < x.size(); ++c) {
        outside = x[c] < 0 || x[c] >= tree_.codec().radices()[c];
      }
      key.steps.push_back(outside ? -1 : tree_.codec().encode(x));
    }
  }
  if (static_cast<int>(key.size()) > tree_.history_length()) throw UsageError("key deeper than the dataset horizon");
  return key;
}

namespace {

std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    auto pos = line.find(',', start);
    auto field = line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start);
    while (!field.empty() && (field.front() == ' ' || field.front() == '\t')) field.remove_prefix(1);
    while (!field.empty() && (field.back() == ' ' || field.back() == '\t' || field.back() == '\r')) field.remove_suffix(1);
    out.push_back(field);
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

struct Layout {
  int horizon = 0;
  int width = 0;
};

Layout parse_header(const std::vector<std::string_view>& cols, const std::string& origin) {
  if (cols.size() < 3) throw ParseError(origin, 1, "header needs at least unit_id, z1, y");
  if (cols.front() != "unit_id") throw ParseError(origin, 1, "first header column must be unit_id");
  if (cols.back() != "y") throw ParseError(origin, 1, "last header column must be y");
  Layout layout;
  std::size_t i = 1;
  while (i + 1 < cols.size() && !cols[i].empty() && cols[i][0] == 'z') {
    ++layout.horizon;
    if (cols[i] != "z" + std::to_string(layout.horizon)) {
      throw ParseError(origin, 1, "expected column z" + std::to_string(layout.horizon) + ", got " + std::string(cols[i]));
    }
    ++i;
  }
  if (layout.horizon == 0) throw ParseError(origin, 1, "no treatment columns");
  const std::size_t n_cov = cols.size() - 1 - i;
  if (layout.horizon == 1) {
    if (n_cov != 0) throw ParseError(origin, 1, "T=1 datasets cannot have covariate columns");
    return layout;
  }
  const auto periods = static_cast<std::size_t>(layout.horizon - 1);
  if (n_cov == 0 || n_cov % periods != 0) {
    throw ParseError(origin, 1, "covariate column count " + std::to_string(n_cov) + " is not a multiple of T-1");
  }
  layout.width = static_cast<int>(n_cov / periods);
  for (int t = 1; t < layout.horizon; ++t) {
    for (int c = 1; c <= layout.width; ++c, ++i) {
      const std::string full = "x" + std::to_string(t) + "_" + std::to_string(c);
      const std::string shorthand = "x" + std::to_string(t);
      if (cols[i] != full && !(layout.width == 1 && cols[i] == shorthand)) {
        throw ParseError(origin, 1, "expected column " + full + ", got " + std::string(cols[i]));
      }
    }
  }
  return layout;
}

int parse_code(std::string_view field, const std::string& origin, std::size_t line, const char* what) {
  long long value = 0;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size() || field.empty()) {
    throw ParseError(origin, line, std::string("non-integer ") + what + " code '" + std::string(field) + "'");
  }
  if (value < 0) {
    throw DomainError(origin + ":" + std::to_string(line) + ": negative " + what + " code " + std::to_string(value));
  }
  if (value > 1'000'000) throw DomainError(origin + ":" + std::to_string(line) + ": " + what + " code too large");
  return static_cast<int>(value);
}

}  // namespace

Dataset load_dataset(std::istream& in, const std::string& origin) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError(origin, 1, "missing header row");
  if (line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF) line.erase(0, 3);  // UTF-8 BOM
  const auto layout = parse_header(split_csv(line), origin);
  const std::size_t expected = static_cast<std::size_t>(layout.horizon + (layout.horizon - 1) * layout.width + 2);

  std::vector<ObservationRecord> records;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto fields = split_csv(line);
    if (fields.size() != expected) {
      throw ParseError(origin, line_no,
                       "expected " + std::to_string(expected) + " fields, got " + std::to_string(fields.size()));
    }
    ObservationRecord r;
    r.unit_id = std::string(fields[0]);
    std::size_t f = 1;
    for (int t = 0; t < layout.horizon; ++t) r.treatments.push_back(parse_code(fields[f++], origin, line_no, "treatment"));
    for (int t = 0; t + 1 < layout.horizon; ++t) {
      std::vector<int> x;
      for (int c = 0; c < layout.width; ++c) x.push_back(parse_code(fields[f++], origin, line_no, "covariate"));
      r.covariates.push_back(std::move(x));
    }
    const auto yf = fields[f];
    double y = 0.0;
    auto [ptr, ec] = std::from_chars(yf.data(), yf.data() + yf.size(), y);
    if (ec != std::errc() || ptr != yf.data() + yf.size() || yf.empty() || !std::isfinite(y)) {
      throw ParseError(origin, line_no, "non-numeric outcome '" + std::string(yf) + "'");
    }
    r.outcome = y;
    records.push_back(std::move(r));
  }
  if (records.empty()) throw ParseError(origin, line_no, "no data rows");
  return Dataset(std::move(records), layout.horizon, layout.width);
}

Dataset load_dataset_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path.string(), 0, "cannot open file");
  return load_dataset(in, path.string());
}

void write_dataset(std::ostream& out, const Dataset& data) {
  const int T = data.horizon();
  const int w = data.covariate_width();
  out << "unit_id";
  for (int t = 1; t <= T; ++t) out << ",z" << t;
  for (int t = 1; t < T; ++t) {
    for (int c = 1; c <= w; ++c) out << ",x" << t << '_' << c;
  }
  out << ",y\n";
  char buf[64];
  for (const auto& r : data.records()) {
    out << r.unit_id;
    for (int z : r.treatments) out << ',' << z;
    for (const auto& x : r.covariates) {
      for (int c : x) out << ',' << c;
    }
    auto res = std::to_chars(buf, buf + sizeof buf, r.outcome);
    out << ',' << std::string_view(buf, static_cast<std::size_t>(res.ptr - buf)) << '\n';
  }
}

}  // namespace netfx
