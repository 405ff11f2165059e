#include "quadrant/model_io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include <yaml-cpp/yaml.h>

namespace quadrant {

namespace {

[[noreturn]] void fail_at(const YAML::Node& node, const std::string& what) {
  const auto mark = node.Mark();
  if (mark.is_null()) throw ParseError(what);
  throw ParseError(what, mark.line + 1, mark.column + 1);
}

int parse_int(const YAML::Node& node) {
  try {
    return node.as<int>();
  } catch (const YAML::Exception&) {
    fail_at(node, "expected an integer");
  }
}

StepDistribution::Entry parse_mass(const YAML::Node& node) {
  if (!node.IsSequence() || node.size() != 3) fail_at(node, "expected a [di, dj, p] triple");
  StepDistribution::Entry e;
  e.step = {parse_int(node[0]), parse_int(node[1])};
  const auto text = node[2].as<std::string>();
  const auto slash = text.find('/');
  if (slash != std::string::npos) {
    std::int64_t num = 0, den = 0;
    const auto a = std::from_chars(text.data(), text.data() + slash, num);
    const auto b = std::from_chars(text.data() + slash + 1, text.data() + text.size(), den);
    if (a.ec != std::errc{} || a.ptr != text.data() + slash || b.ec != std::errc{} ||
        b.ptr != text.data() + text.size() || den == 0)
      fail_at(node[2], "malformed rational '" + text + "'");
    e.exact = Fraction(num, den);
    e.p = static_cast<double>(num) / static_cast<double>(den);
    return e;
  }
  std::int64_t whole = 0;
  const auto r = std::from_chars(text.data(), text.data() + text.size(), whole);
  if (r.ec == std::errc{} && r.ptr == text.data() + text.size()) {
    e.exact = Fraction(whole);
    e.p = static_cast<double>(whole);
    return e;
  }
  try {
    e.p = node[2].as<double>();
  } catch (const YAML::Exception&) {
    fail_at(node[2], "expected a probability, got '" + text + "'");
  }
  return e;
}

StepDistribution parse_law(const YAML::Node& node) {
  if (!node.IsSequence()) fail_at(node, "expected a list of [di, dj, p] triples");
  std::vector<StepDistribution::Entry> entries;
  for (const auto& m : node) entries.push_back(parse_mass(m));
  return StepDistribution(std::move(entries));
}

std::vector<StepDistribution> parse_laws(const YAML::Node& root, const char* key, int count) {
  const auto node = root[key];
  if (!node) fail_at(root, std::string("missing key '") + key + "'");
  if (!node.IsSequence() || static_cast<int>(node.size()) != count)
    fail_at(node, std::string("'") + key + "' must list " + std::to_string(count) + " laws");
  std::vector<StepDistribution> out;
  for (const auto& law : node) out.push_back(parse_law(law));
  return out;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open model file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_law(std::ostream& os, const StepDistribution& d) {
  os << '[';
  bool first = true;
  for (const auto& e : d.entries()) {
    if (!first) os << ", ";
    first = false;
    os << '[' << e.step.di << ", " << e.step.dj << ", ";
    if (e.exact)
      os << '"' << e.exact->numerator() << '/' << e.exact->denominator() << '"';
    else
      os << e.p;
    os << ']';
  }
  os << ']';
}

constexpr std::string_view kReference = R"(# Reference model: interior steps 1/6 right, 3/8 down, 1/3 left, 1/8 up
# (x1 = 2, y1 = 3). Boundary rows push along the axes: V1 = 1/4, V2 = 5/12.
k0: 1
interior: [[1, 0, "1/6"], [0, -1, "3/8"], [-1, 0, "1/3"], [0, 1, "1/8"]]
horizontal:
  - [[2, 0, "1/2"], [1, 1, "1/4"], [-1, 0, "1/4"]]
vertical:
  - [[0, 2, "1/2"], [1, 1, "1/4"], [0, -1, "1/4"]]
corner:
  - - [[1, 0, "1/3"], [0, 1, "1/3"], [1, 1, "1/3"]]
)";

constexpr std::string_view kNonsym = R"(# Non-symmetric interior with mild reflecting boundary rows (V1 = 1/20, V2 = 1/6).
k0: 1
interior: [[1, 0, "1/6"], [0, -1, "3/8"], [-1, 0, "1/3"], [0, 1, "1/8"]]
horizontal:
  - [[1, 0, "1/2"], [1, 1, "1/4"], [-1, 0, "1/4"]]
vertical:
  - [[0, 1, "1/2"], [1, 1, "1/4"], [0, -1, "1/4"]]
corner:
  - - [[1, 0, "1/2"], [0, 1, "1/2"]]
)";

constexpr std::string_view kSymmetric = R"(# Symmetric interior (x1 = y1 = 3, t0 = 1) with mirrored boundary rows.
k0: 1
interior: [[1, 0, "1/8"], [0, 1, "1/8"], [-1, 0, "3/8"], [0, -1, "3/8"]]
horizontal:
  - [[2, 0, "1/2"], [1, 1, "1/4"], [-1, 0, "1/4"]]
vertical:
  - [[0, 2, "1/2"], [1, 1, "1/4"], [0, -1, "1/4"]]
corner:
  - - [[1, 0, "1/3"], [0, 1, "1/3"], [1, 1, "1/3"]]
)";

}  // namespace

QuadrantModel parse_model(std::string_view text, std::string name) {
  YAML::Node root;
  try {
    root = YAML::Load(std::string(text));
  } catch (const YAML::ParserException& e) {
    throw ParseError(e.msg, e.mark.line + 1, e.mark.column + 1);
  }
  if (!root || root.IsNull()) throw ParseError("empty model document");
  if (!root.IsMap()) fail_at(root, "model document must be a mapping");
  for (const auto& kv : root) {
    const auto key = kv.first.as<std::string>();
    if (key != "k0" && key != "interior" && key != "horizontal" && key != "vertical" &&
        key != "corner")
      fail_at(kv.first, "unknown key '" + key + "'");
  }
  if (!root["k0"]) fail_at(root, "missing key 'k0'");
  const int k0 = parse_int(root["k0"]);
  if (k0 < 1) fail_at(root["k0"], "k0 must be positive");
  if (!root["interior"]) fail_at(root, "missing key 'interior'");
  auto interior = parse_law(root["interior"]);
  auto horizontal = parse_laws(root, "horizontal", k0);
  auto vertical = parse_laws(root, "vertical", k0);

  const auto corner_node = root["corner"];
  if (!corner_node) fail_at(root, "missing key 'corner'");
  if (!corner_node.IsSequence() || static_cast<int>(corner_node.size()) != k0)
    fail_at(corner_node, "'corner' must have " + std::to_string(k0) + " rows");
  std::vector<StepDistribution> corner;
  for (const auto& row : corner_node) {
    if (!row.IsSequence() || static_cast<int>(row.size()) != k0)
      fail_at(row, "corner row must have " + std::to_string(k0) + " laws");
    for (const auto& law : row) corner.push_back(parse_law(law));
  }
  QuadrantModel model(k0, std::move(interior), std::move(horizontal), std::move(vertical),
                      std::move(corner));
  model.set_name(std::move(name));
  return model;
}

std::string_view builtin_model_text(std::string_view name) {
  if (name == "reference") return kReference;
  if (name == "nonsym") return kNonsym;
  if (name == "symmetric") return kSymmetric;
  throw IoError("unknown builtin model '" + std::string(name) + "'");
}

QuadrantModel read_model(const std::string& source) {
  constexpr std::string_view prefix = "builtin:";
  if (source.rfind(prefix, 0) == 0) {
    const auto name = source.substr(prefix.size());
    return parse_model(builtin_model_text(name), name);
  }
  return parse_model(read_file(source), std::filesystem::path(source).stem().string());
}

QuadrantModel load_model(const std::string& source) {
  auto model = read_model(source);
  auto report = validate_model(model);
  if (!report.ok()) throw ModelValidationError(std::move(report));
  return model;
}

std::string serialize_model(const QuadrantModel& model) {
  std::ostringstream os;
  os.precision(17);
  const int k0 = model.k0();
  os << "k0: " << k0 << "\ninterior: ";
  write_law(os, model.interior());
  os << "\nhorizontal:\n";
  for (int j = 0; j < k0; ++j) {
    os << "  - ";
    write_law(os, model.horizontal(j));
    os << '\n';
  }
  os << "vertical:\n";
  for (int i = 0; i < k0; ++i) {
    os << "  - ";
    write_law(os, model.vertical(i));
    os << '\n';
  }
  os << "corner:\n";
  for (int i = 0; i < k0; ++i) {
    os << "  - ";
    for (int j = 0; j < k0; ++j) {
      os << (j == 0 ? "- " : "    - ");
      write_law(os, model.corner(i, j));
      os << '\n';
    }
  }
  return os.str();
}

}  // namespace quadrant
