#include "ordmono/io.hpp"

#include <fstream>
#include <ostream>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <yaml-cpp/yaml.h>

#include "ordmono/error.hpp"

namespace ordmono {

namespace {

struct CsvRecord {
  std::vector<std::string> fields;
  std::size_t line;
};

std::vector<CsvRecord> split_records(std::string_view text) {
  std::vector<CsvRecord> records;
  std::size_t line = 1;
  std::size_t i = 0;
  if (text.substr(0, 3) == "\xEF\xBB\xBF") i = 3;  // UTF-8 byte order mark

  while (i < text.size()) {
    CsvRecord rec{{}, line};
    std::string field;
    bool quoted_field = false;
    bool end_of_record = false;
    while (!end_of_record) {
      if (i >= text.size()) {
        rec.fields.push_back(std::move(field));
        break;
      }
      const char ch = text[i];
      if (ch == '"' && field.find_first_not_of(" \t") == std::string::npos &&
          !quoted_field) {
        field.clear();
        quoted_field = true;
        const std::size_t open_line = line;
        ++i;
        for (;;) {
          if (i >= text.size()) {
            throw Error(ErrorKind::Parse,
                        fmt::format("line {}: unterminated quoted field", open_line));
          }
          if (text[i] == '"') {
            if (i + 1 < text.size() && text[i + 1] == '"') {
              field.push_back('"');
              i += 2;
              continue;
            }
            ++i;
            break;
          }
          if (text[i] == '\n') ++line;
          field.push_back(text[i++]);
        }
        while (i < text.size() && (text[i] == ' ' || text[i] == '\t')) ++i;
        if (i < text.size() && text[i] != ',' && text[i] != '\n' && text[i] != '\r') {
          throw Error(ErrorKind::Parse,
                      fmt::format("line {}: unexpected character after closing quote",
                                  line));
        }
        continue;
      }
      if (ch == ',') {
        rec.fields.push_back(std::move(field));
        field.clear();
        quoted_field = false;
        ++i;
      } else if (ch == '\r' || ch == '\n') {
        rec.fields.push_back(std::move(field));
        if (ch == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
        ++i;
        ++line;
        end_of_record = true;
      } else {
        if (quoted_field) {
          throw Error(ErrorKind::Parse,
                      fmt::format("line {}: unexpected character after closing quote",
                                  line));
        }
        field.push_back(ch);
        ++i;
      }
    }
    const bool blank = rec.fields.size() == 1 &&
                       rec.fields[0].find_first_not_of(" \t") == std::string::npos;
    if (!blank) records.push_back(std::move(rec));
  }
  return records;
}

std::string quote_if_needed(const std::string& field) {
  if (field.find_first_of(",\"\r\n") == std::string::npos &&
      (field.empty() || (field.front() != ' ' && field.back() != ' '))) {
    return field;
  }
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

// yaml-cpp helpers that turn library exceptions into located Parse errors.
class Reader {
 public:
  explicit Reader(std::string source) : source_(std::move(source)) {}

  [[noreturn]] void fail(const YAML::Node& node, const std::string& what) const {
    const auto mark = node.Mark();
    if (mark.is_null()) throw Error(ErrorKind::Parse, fmt::format("{}: {}", source_, what));
    throw Error(ErrorKind::Parse,
                fmt::format("{}: line {}: {}", source_, mark.line + 1, what));
  }

  void only_keys(const YAML::Node& map, std::initializer_list<std::string_view> keys,
                 const std::string& where) const {
    if (!map.IsMap()) fail(map, fmt::format("{} must be a mapping", where));
    for (const auto& kv : map) {
      const auto key = kv.first.as<std::string>();
      bool known = false;
      for (auto k : keys) known = known || key == k;
      if (!known) fail(kv.first, fmt::format("unknown key '{}' in {}", key, where));
    }
  }

  YAML::Node required(const YAML::Node& map, const std::string& key,
                      const std::string& where) const {
    const YAML::Node node = map[key];
    if (!node) fail(map, fmt::format("{} is missing '{}'", where, key));
    return node;
  }

  template <class T>
  T scalar(const YAML::Node& node, const std::string& what) const {
    if (!node.IsScalar()) fail(node, fmt::format("{} must be a scalar", what));
    try {
      return node.as<T>();
    } catch (const YAML::Exception&) {
      fail(node, fmt::format("cannot read {} from '{}'", what, node.Scalar()));
    }
  }

  template <class T>
  std::vector<T> list(const YAML::Node& node, const std::string& what) const {
    if (!node.IsSequence()) fail(node, fmt::format("{} must be a list", what));
    std::vector<T> out;
    for (const auto& item : node) out.push_back(scalar<T>(item, what));
    return out;
  }

 private:
  std::string source_;
};

YAML::Node load_yaml(std::string_view text, const std::string& source) {
  try {
    return YAML::Load(std::string(text));
  } catch (const YAML::ParserException& e) {
    throw Error(ErrorKind::Parse,
                fmt::format("{}: line {}: {}", source, e.mark.line + 1, e.msg));
  }
}

CategoricalVariable categorical(const Reader& rd, const YAML::Node& node,
                                const std::string& where) {
  CategoricalVariable v;
  v.name = rd.scalar<std::string>(rd.required(node, "name", where), "name");
  v.levels = rd.list<std::string>(rd.required(node, "levels", where),
                                  fmt::format("levels of '{}'", v.name));
  return v;
}

void read_response(const Reader& rd, const YAML::Node& root, ModelSchema& schema) {
  const YAML::Node response = rd.required(root, "response", "file");
  rd.only_keys(response, {"name", "levels"}, "response");
  if (response["name"]) schema.response_name = rd.scalar<std::string>(response["name"], "name");
  schema.response_levels =
      rd.list<std::string>(rd.required(response, "levels", "response"), "response levels");
}

void validate_schema(const Reader& rd, const YAML::Node& root, const ModelSchema& schema) {
  try {
    schema.validate();
  } catch (const Error& e) {
    rd.fail(root, e.what());
  }
}

}  // namespace

Table parse_csv(std::string_view text) {
  auto records = split_records(text);
  if (records.empty()) throw Error(ErrorKind::Parse, "empty CSV input: no header row");
  Table table;
  for (auto& h : records[0].fields) {
    const auto b = h.find_first_not_of(" \t");
    const auto e = h.find_last_not_of(" \t");
    table.header.push_back(b == std::string::npos ? "" : h.substr(b, e - b + 1));
  }
  for (std::size_t r = 1; r < records.size(); ++r) {
    if (records[r].fields.size() != table.header.size()) {
      throw Error(ErrorKind::Parse,
                  fmt::format("line {}: expected {} fields, found {}", records[r].line,
                              table.header.size(), records[r].fields.size()));
    }
    table.rows.push_back(std::move(records[r].fields));
    table.lines.push_back(records[r].line);
  }
  return table;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, fmt::format("cannot open '{}'", path));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Table read_csv(const std::string& path) {
  try {
    return parse_csv(read_file(path));
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::Parse) throw;
    throw Error(ErrorKind::Parse, fmt::format("{}: {}", path, e.what()));
  }
}

void write_csv(std::ostream& os, const Table& table) {
  auto write_row = [&](const std::vector<std::string>& row) {
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (j) os << ',';
      os << quote_if_needed(row[j]);
    }
    os << '\n';
  };
  write_row(table.header);
  for (const auto& row : table.rows) write_row(row);
}

Table observations_table(const ModelSchema& schema,
                         std::span<const Observation> observations) {
  Table t;
  t.header.push_back(schema.response_name);
  for (const auto& v : schema.ordinal) t.header.push_back(v.name);
  for (const auto& v : schema.nominal) t.header.push_back(v.name);
  for (const auto& name : schema.numeric) t.header.push_back(name);
  for (const auto& obs : observations) {
    std::vector<std::string> row;
    row.push_back(schema.response_levels.at(obs.response));
    for (std::size_t s = 0; s < schema.ordinal.size(); ++s) {
      row.push_back(schema.ordinal[s].levels.at(obs.ordinal.at(s)));
    }
    for (std::size_t s = 0; s < schema.nominal.size(); ++s) {
      row.push_back(schema.nominal[s].levels.at(obs.nominal.at(s)));
    }
    // Shortest representation that reads back to the same double.
    for (double v : obs.numeric) row.push_back(fmt::format("{}", v));
    t.rows.push_back(std::move(row));
  }
  return t;
}

ModelSchema parse_schema(std::string_view yaml, const std::string& source) {
  const Reader rd(source);
  const YAML::Node root = load_yaml(yaml, source);
  if (!root.IsMap()) throw Error(ErrorKind::Parse, source + ": expected a mapping");
  rd.only_keys(root, {"response", "ordinal", "nominal", "numeric"}, "schema");

  ModelSchema schema;
  read_response(rd, root, schema);
  if (const auto ord = root["ordinal"]) {
    if (!ord.IsSequence()) rd.fail(ord, "'ordinal' must be a list");
    for (const auto& node : ord) {
      rd.only_keys(node, {"name", "levels"}, "ordinal predictor");
      schema.ordinal.push_back(categorical(rd, node, "ordinal predictor"));
    }
  }
  if (const auto nom = root["nominal"]) {
    if (!nom.IsSequence()) rd.fail(nom, "'nominal' must be a list");
    for (const auto& node : nom) {
      rd.only_keys(node, {"name", "levels"}, "nominal predictor");
      schema.nominal.push_back(categorical(rd, node, "nominal predictor"));
    }
  }
  if (const auto num = root["numeric"]) {
    schema.numeric = rd.list<std::string>(num, "numeric predictor names");
  }
  validate_schema(rd, root, schema);
  return schema;
}

ModelSchema load_schema(const std::string& path) { return parse_schema(read_file(path), path); }

ScenarioFile parse_scenario(std::string_view yaml, const std::string& source) {
  const Reader rd(source);
  const YAML::Node root = load_yaml(yaml, source);
  if (!root.IsMap()) throw Error(ErrorKind::Parse, source + ": expected a mapping");
  rd.only_keys(root,
               {"name", "seed", "n", "replicates", "response", "intercepts", "ordinal",
                "nominal", "numeric", "study"},
               "scenario");

  ScenarioFile out;
  ScenarioSpec& spec = out.spec;
  if (root["name"]) spec.name = rd.scalar<std::string>(root["name"], "name");
  spec.seed = rd.scalar<std::uint64_t>(rd.required(root, "seed", "scenario"), "seed");
  spec.n = rd.scalar<int>(rd.required(root, "n", "scenario"), "n");
  spec.replicates =
      rd.scalar<int>(rd.required(root, "replicates", "scenario"), "replicates");
  read_response(rd, root, spec.schema);

  const auto alpha = rd.list<double>(rd.required(root, "intercepts", "scenario"),
                                     "intercepts");
  spec.truth.alpha = Eigen::Map<const Eigen::VectorXd>(alpha.data(),
                                                       static_cast<Eigen::Index>(alpha.size()));

  std::vector<double> beta;
  auto read_categorical = [&](const char* key, std::vector<CategoricalVariable>& vars,
                              std::vector<std::vector<double>>& probs) {
    const auto list = root[key];
    if (!list) return;
    if (!list.IsSequence()) rd.fail(list, fmt::format("'{}' must be a list", key));
    for (const auto& node : list) {
      rd.only_keys(node, {"name", "levels", "coefficients", "probabilities"},
                   fmt::format("{} predictor", key));
      auto var = categorical(rd, node, fmt::format("{} predictor", key));
      const auto coef = rd.list<double>(
          rd.required(node, "coefficients", var.name),
          fmt::format("coefficients of '{}'", var.name));
      if (coef.size() + 1 != var.levels.size()) {
        rd.fail(node, fmt::format("'{}' has {} levels, so it needs {} coefficients "
                                  "(the first level is the baseline)",
                                  var.name, var.levels.size(), var.levels.size() - 1));
      }
      beta.insert(beta.end(), coef.begin(), coef.end());
      probs.push_back(rd.list<double>(rd.required(node, "probabilities", var.name),
                                      fmt::format("probabilities of '{}'", var.name)));
      vars.push_back(std::move(var));
    }
  };
  read_categorical("ordinal", spec.schema.ordinal, spec.ordinal_probs);
  read_categorical("nominal", spec.schema.nominal, spec.nominal_probs);

  if (const auto num = root["numeric"]) {
    if (!num.IsSequence()) rd.fail(num, "'numeric' must be a list");
    for (const auto& node : num) {
      rd.only_keys(node, {"name", "coefficient", "mean", "variance"}, "numeric predictor");
      const auto name = rd.scalar<std::string>(rd.required(node, "name", "numeric predictor"),
                                               "name");
      spec.schema.numeric.push_back(name);
      beta.push_back(rd.scalar<double>(rd.required(node, "coefficient", name), "coefficient"));
      NormalSpec ns;
      if (node["mean"]) ns.mean = rd.scalar<double>(node["mean"], "mean");
      if (node["variance"]) ns.variance = rd.scalar<double>(node["variance"], "variance");
      if (!(ns.variance > 0.0)) rd.fail(node, fmt::format("variance of '{}' must be positive", name));
      spec.numeric.push_back(ns);
    }
  }
  spec.truth.beta =
      Eigen::Map<const Eigen::VectorXd>(beta.data(), static_cast<Eigen::Index>(beta.size()));

  if (const auto study = root["study"]) {
    rd.only_keys(study, {"strategies", "alpha_star", "threads", "mdc"}, "study");
    StudyConfig& cfg = out.study;
    if (study["strategies"]) {
      cfg.strategies.clear();
      for (const auto& name : rd.list<std::string>(study["strategies"], "strategies")) {
        try {
          cfg.strategies.push_back(parse_strategy(name));
        } catch (const Error& e) {
          rd.fail(study["strategies"], e.what());
        }
      }
    }
    if (study["alpha_star"]) cfg.alpha_star = rd.scalar<double>(study["alpha_star"], "alpha_star");
    if (study["threads"]) cfg.threads = rd.scalar<int>(study["threads"], "threads");
    if (const auto mdc = study["mdc"]) {
      rd.only_keys(mdc, {"c_initial", "c_lower_tol", "c_upper_tol", "step", "max_unresolved"},
                   "mdc");
      if (mdc["c_initial"]) cfg.mdc.c_initial = rd.scalar<double>(mdc["c_initial"], "c_initial");
      if (mdc["c_lower_tol"]) cfg.mdc.c_lower_tol = rd.scalar<double>(mdc["c_lower_tol"], "c_lower_tol");
      if (mdc["c_upper_tol"]) cfg.mdc.c_upper_tol = rd.scalar<double>(mdc["c_upper_tol"], "c_upper_tol");
      if (mdc["step"]) cfg.mdc.step = rd.scalar<double>(mdc["step"], "step");
      if (mdc["max_unresolved"]) cfg.mdc.max_unresolved = rd.scalar<int>(mdc["max_unresolved"], "max_unresolved");
    }
  }

  try {
    spec.validate();
    out.study.mdc.validate();
  } catch (const Error& e) {
    throw Error(e.kind(), fmt::format("{}: {}", source, e.what()));
  }
  return out;
}

ScenarioFile load_scenario(const std::string& path) {
  return parse_scenario(read_file(path), path);
}

}  // namespace ordmono
