#include "pipemeta/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <unordered_map>

namespace pipemeta {

namespace fs = std::filesystem;

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        field += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(trim(field));
      field.clear();
    } else {
      field += c;
    }
  }
  fields.push_back(trim(field));
  return fields;
}

std::string quote_csv(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

bool is_missing_token(const std::string& s) { return s.empty() || s == "?"; }

std::optional<double> parse_number(const std::string& s) {
  double v = 0.0;
  const char* begin = s.data();
  const char* end = s.data() + s.size();
  if (begin != end && *begin == '+') ++begin;
  auto [ptr, ec] = std::from_chars(begin, end, v);
  if (ec != std::errc() || ptr != end || !std::isfinite(v)) return std::nullopt;
  return v;
}

std::string format_number(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

std::set<std::string> parse_list(const std::string& text) {
  std::set<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.insert(item);
  }
  return out;
}

std::string join(const std::set<std::string>& items) {
  std::string out;
  for (const auto& s : items) {
    if (!out.empty()) out += ',';
    out += s;
  }
  return out;
}

}  // namespace

std::size_t Column::missing_count() const {
  return static_cast<std::size_t>(std::count(missing.begin(), missing.end(), true));
}

std::size_t RawDataset::missing_cells() const {
  std::size_t n = 0;
  for (const auto& c : columns) n += c.missing_count();
  return n;
}

void RawDataset::validate() const {
  if (rows() == 0) throw DataError(DataErrorCode::NoRows, id + ": dataset has zero data rows");
  if (rows() < 2) throw DataError(DataErrorCode::NoRows, id + ": dataset needs at least 2 rows");
  for (const auto& c : columns) {
    if (c.size() != rows()) {
      throw DataError(DataErrorCode::Ragged, id + ": column '" + c.name + "' has " + std::to_string(c.size()) +
                                                 " entries, target has " + std::to_string(rows()));
    }
    if (c.kind == ColumnKind::Numeric) {
      for (std::size_t r = 0; r < c.size(); ++r) {
        if (!c.missing[r] && !std::isfinite(c.numbers[r])) {
          throw DataError(DataErrorCode::Unreadable,
                          id + ": non-finite value at row " + std::to_string(r + 1) + ", column '" + c.name + "'");
        }
      }
    }
  }
  const std::set<std::string> classes(target.begin(), target.end());
  if (classes.size() < 2) throw DataError(DataErrorCode::SingleClass, id + ": target has a single class");
}

CleanDataset CleanDataset::subset(const IndexList& rows) const {
  return CleanDataset{id, take_rows(X, rows), take_rows(y, rows), feature_names};
}

Schema Schema::read(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError(DataErrorCode::Unreadable, "cannot open schema file " + path.string());
  Schema schema;
  std::string line;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key == "target") {
      schema.target = value;
    } else if (key == "categorical") {
      schema.categorical = parse_list(value);
    } else if (key == "numeric") {
      schema.numeric = parse_list(value);
    }
  }
  if (schema.target.empty()) throw DataError(DataErrorCode::Unreadable, path.string() + ": schema names no target");
  return schema;
}

void Schema::write(const fs::path& path) const {
  std::ofstream out(path);
  if (!out) throw DataError(DataErrorCode::Unreadable, "cannot write schema file " + path.string());
  out << "target=" << target << '\n';
  if (!categorical.empty()) out << "categorical=" << join(categorical) << '\n';
  if (!numeric.empty()) out << "numeric=" << join(numeric) << '\n';
}

RawDataset load_csv(const fs::path& path, const Schema& schema) {
  std::ifstream in(path);
  if (!in) throw DataError(DataErrorCode::Unreadable, "cannot open " + path.string());

  std::string line;
  if (!std::getline(in, line)) throw DataError(DataErrorCode::NoRows, path.string() + ": missing header row");
  const auto header = split_csv_line(line);
  const auto target_it = std::find(header.begin(), header.end(), schema.target);
  if (target_it == header.end()) {
    throw DataError(DataErrorCode::UnknownColumn, path.string() + ": target column '" + schema.target + "' not found");
  }
  const auto target_col = static_cast<std::size_t>(target_it - header.begin());
  for (const auto& name : schema.categorical) {
    if (std::find(header.begin(), header.end(), name) == header.end()) {
      throw DataError(DataErrorCode::UnknownColumn, path.string() + ": categorical column '" + name + "' not found");
    }
  }

  std::vector<std::vector<std::string>> cells(header.size());
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto fields = split_csv_line(line);
    if (fields.size() != header.size()) {
      throw DataError(DataErrorCode::Ragged, path.string() + ": row " + std::to_string(line_no - 1) + " has " +
                                                 std::to_string(fields.size()) + " fields, expected " +
                                                 std::to_string(header.size()));
    }
    if (is_missing_token(fields[target_col])) continue;
    for (std::size_t c = 0; c < fields.size(); ++c) cells[c].push_back(std::move(fields[c]));
  }
  if (cells[target_col].empty()) throw DataError(DataErrorCode::NoRows, path.string() + ": zero data rows");

  RawDataset raw;
  raw.id = path.stem().string();
  raw.target = cells[target_col];
  raw.target_name = schema.target;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (c == target_col) continue;
    Column col;
    col.name = header[c];
    const auto& values = cells[c];
    col.missing.resize(values.size());
    std::vector<std::optional<double>> parsed(values.size());
    bool all_numeric = true;
    for (std::size_t r = 0; r < values.size(); ++r) {
      col.missing[r] = is_missing_token(values[r]);
      if (col.missing[r]) continue;
      parsed[r] = parse_number(values[r]);
      if (!parsed[r]) all_numeric = false;
    }
    if (schema.categorical.count(col.name)) {
      col.kind = ColumnKind::Categorical;
    } else if (schema.numeric.count(col.name)) {
      if (!all_numeric) {
        for (std::size_t r = 0; r < values.size(); ++r) {
          if (!col.missing[r] && !parsed[r]) {
            throw DataError(DataErrorCode::Unreadable, path.string() + ": row " + std::to_string(r + 1) +
                                                           ", column '" + col.name + "': '" + values[r] +
                                                           "' is not a finite number");
          }
        }
      }
      col.kind = ColumnKind::Numeric;
    } else {
      col.kind = all_numeric ? ColumnKind::Numeric : ColumnKind::Categorical;
    }
    if (col.kind == ColumnKind::Numeric) {
      col.numbers.resize(values.size(), 0.0);
      for (std::size_t r = 0; r < values.size(); ++r) {
        if (!col.missing[r]) col.numbers[r] = *parsed[r];
      }
    } else {
      col.labels = values;
      for (std::size_t r = 0; r < values.size(); ++r) {
        if (col.missing[r]) col.labels[r].clear();
      }
    }
    raw.columns.push_back(std::move(col));
  }
  raw.validate();
  return raw;
}

void save_csv(const RawDataset& raw, const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError(DataErrorCode::Unreadable, "cannot write " + path.string());
  for (const auto& c : raw.columns) out << quote_csv(c.name) << ',';
  out << quote_csv(raw.target_name) << '\n';
  for (std::size_t r = 0; r < raw.rows(); ++r) {
    for (const auto& c : raw.columns) {
      if (!c.missing[r]) {
        out << (c.kind == ColumnKind::Numeric ? format_number(c.numbers[r]) : quote_csv(c.labels[r]));
      }
      out << ',';
    }
    out << quote_csv(raw.target[r]) << '\n';
  }
}

RawDataset impute(const RawDataset& raw, std::uint64_t seed, const std::optional<IndexList>& fit_rows) {
  RawDataset out;
  out.id = raw.id;
  out.target = raw.target;
  out.target_name = raw.target_name;
  for (std::size_t c = 0; c < raw.columns.size(); ++c) {
    const Column& col = raw.columns[c];
    std::vector<std::size_t> support;
    if (fit_rows) {
      for (auto r : *fit_rows) {
        if (!col.missing[static_cast<std::size_t>(r)]) support.push_back(static_cast<std::size_t>(r));
      }
    } else {
      for (std::size_t r = 0; r < col.size(); ++r) {
        if (!col.missing[r]) support.push_back(r);
      }
    }
    if (support.empty()) continue;

    Column filled = col;
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(c)));
    for (std::size_t r = 0; r < filled.size(); ++r) {
      if (!filled.missing[r]) continue;
      const std::size_t donor = support[uniform_index(rng, support.size())];
      if (filled.kind == ColumnKind::Numeric) {
        filled.numbers[r] = col.numbers[donor];
      } else {
        filled.labels[r] = col.labels[donor];
      }
      filled.missing[r] = false;
    }
    out.columns.push_back(std::move(filled));
  }
  if (out.columns.empty()) {
    throw DataError(DataErrorCode::Unusable, raw.id + ": every column is entirely missing");
  }
  return out;
}

std::pair<CleanDataset, Encoder> one_hot_encode(const RawDataset& raw, const IndexList& fit_rows) {
  Encoder enc;
  for (std::size_t c = 0; c < raw.columns.size(); ++c) {
    const Column& col = raw.columns[c];
    Encoder::ColumnCode code;
    code.source = c;
    code.categorical = col.kind == ColumnKind::Categorical;
    if (code.categorical) {
      for (auto r : fit_rows) {
        const auto& label = col.labels[static_cast<std::size_t>(r)];
        if (std::find(code.categories.begin(), code.categories.end(), label) == code.categories.end()) {
          code.categories.push_back(label);
        }
      }
      for (const auto& cat : code.categories) enc.feature_names_.push_back(col.name + "=" + cat);
      enc.width_ += static_cast<Eigen::Index>(code.categories.size());
    } else {
      enc.feature_names_.push_back(col.name);
      enc.width_ += 1;
    }
    enc.codes_.push_back(std::move(code));
  }
  for (auto r : fit_rows) {
    const auto& label = raw.target[static_cast<std::size_t>(r)];
    if (std::find(enc.class_labels_.begin(), enc.class_labels_.end(), label) == enc.class_labels_.end()) {
      enc.class_labels_.push_back(label);
    }
  }

  CleanDataset clean;
  clean.id = raw.id;
  clean.X = enc.transform(raw);
  clean.y = enc.transform_target(raw.target);
  clean.feature_names = enc.feature_names_;
  return {std::move(clean), std::move(enc)};
}

std::pair<CleanDataset, Encoder> one_hot_encode(const RawDataset& raw) {
  IndexList all(raw.rows());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<Eigen::Index>(i);
  return one_hot_encode(raw, all);
}

Matrix Encoder::transform(const RawDataset& raw) const {
  const auto n = static_cast<Eigen::Index>(raw.rows());
  Matrix X = Matrix::Zero(n, width_);
  Eigen::Index offset = 0;
  for (const auto& code : codes_) {
    const Column& col = raw.columns.at(code.source);
    if (col.missing_count() != 0) throw std::invalid_argument("encoder input still has missing values");
    if (!code.categorical) {
      for (Eigen::Index r = 0; r < n; ++r) X(r, offset) = col.numbers[static_cast<std::size_t>(r)];
      offset += 1;
      continue;
    }
    std::unordered_map<std::string, Eigen::Index> lookup;
    for (std::size_t k = 0; k < code.categories.size(); ++k) lookup[code.categories[k]] = static_cast<Eigen::Index>(k);
    for (Eigen::Index r = 0; r < n; ++r) {
      const auto it = lookup.find(col.labels[static_cast<std::size_t>(r)]);
      if (it != lookup.end()) X(r, offset + it->second) = 1.0;
    }
    offset += static_cast<Eigen::Index>(code.categories.size());
  }
  return X;
}

Labels Encoder::transform_target(const std::vector<std::string>& target) const {
  Labels y(static_cast<Eigen::Index>(target.size()));
  for (std::size_t i = 0; i < target.size(); ++i) {
    const auto it = std::find(class_labels_.begin(), class_labels_.end(), target[i]);
    // Classes absent from the fit rows get -1, which no model predicts.
    y(static_cast<Eigen::Index>(i)) =
        it == class_labels_.end() ? -1 : static_cast<int>(it - class_labels_.begin());
  }
  return y;
}

TaskSplit split(const Labels& y, double ratio, std::uint64_t seed) {
  std::map<int, IndexList> by_class;
  for (Eigen::Index i = 0; i < y.size(); ++i) by_class[y(i)].push_back(i);

  TaskSplit out;
  out.seed = seed;
  for (auto& [label, rows] : by_class) {
    if (rows.size() < 2) {
      throw DataError(DataErrorCode::Stratification,
                      "class " + std::to_string(label) + " has fewer than 2 rows; cannot stratify");
    }
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(static_cast<std::int64_t>(label))));
    shuffle(rows, rng);
    // The epsilon keeps products such as 0.7 * 30 from flooring to 20.
    auto n_train = static_cast<std::size_t>(std::floor(ratio * static_cast<double>(rows.size()) + 1e-9));
    n_train = std::clamp<std::size_t>(n_train, 1, rows.size());
    out.train_idx.insert(out.train_idx.end(), rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(n_train));
    out.test_idx.insert(out.test_idx.end(), rows.begin() + static_cast<std::ptrdiff_t>(n_train), rows.end());
  }
  std::sort(out.train_idx.begin(), out.train_idx.end());
  std::sort(out.test_idx.begin(), out.test_idx.end());
  return out;
}

TaskSplit split(const CleanDataset& clean, double ratio, std::uint64_t seed) { return split(clean.y, ratio, seed); }

std::string to_string(CleanMode mode) { return mode == CleanMode::PreSplit ? "pre-split" : "post-split"; }

CleanMode parse_clean_mode(const std::string& text) {
  if (text == "pre-split") return CleanMode::PreSplit;
  if (text == "post-split") return CleanMode::PostSplit;
  throw std::invalid_argument("unknown clean mode '" + text + "' (expected pre-split or post-split)");
}

PreparedTask prepare(const RawDataset& raw, std::uint64_t dataset_seed, CleanMode mode, double ratio) {
  const auto impute_seed = derive_seed(dataset_seed, "impute");
  const auto split_seed = derive_seed(dataset_seed, "split");
  if (mode == CleanMode::PreSplit) {
    auto [clean, encoder] = one_hot_encode(impute(raw, impute_seed));
    auto task_split = split(clean, ratio, split_seed);
    return {std::move(clean), std::move(task_split)};
  }

  std::vector<std::string> seen;
  Labels provisional(static_cast<Eigen::Index>(raw.rows()));
  for (std::size_t i = 0; i < raw.rows(); ++i) {
    auto it = std::find(seen.begin(), seen.end(), raw.target[i]);
    if (it == seen.end()) it = seen.insert(seen.end(), raw.target[i]);
    provisional(static_cast<Eigen::Index>(i)) = static_cast<int>(it - seen.begin());
  }
  auto task_split = split(provisional, ratio, split_seed);
  auto imputed = impute(raw, impute_seed, task_split.train_idx);
  auto [clean, encoder] = one_hot_encode(imputed, task_split.train_idx);
  return {std::move(clean), std::move(task_split)};
}

std::vector<DatasetFile> discover_datasets(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw DataError(DataErrorCode::Unreadable, dir.string() + " is not a directory");
  std::vector<DatasetFile> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".csv") continue;
    auto schema = entry.path();
    schema.replace_extension(".schema");
    if (!fs::exists(schema)) continue;
    files.push_back({entry.path().stem().string(), entry.path(), schema});
  }
  std::sort(files.begin(), files.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  return files;
}

RawDataset load_dataset(const DatasetFile& file) {
  auto raw = load_csv(file.csv, Schema::read(file.schema));
  raw.id = file.id;
  return raw;
}

}  // namespace pipemeta
