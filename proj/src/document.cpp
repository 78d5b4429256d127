#include "netctrl/document.hpp"

#include <array>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>

namespace netctrl {
namespace {

using json = nlohmann::json;

struct Shape {
  const char* key;
  const char* rows;
  const char* cols;
};

constexpr std::array<Shape, 9> kPlantShapes = {{
    {"A_xx", "m_x", "m_x"},
    {"A_xv", "m_x", "m_v"},
    {"B_xu", "m_x", "m_u"},
    {"A_zx", "m_z", "m_x"},
    {"A_zv", "m_z", "m_v"},
    {"B_zu", "m_z", "m_u"},
    {"C_yx", "m_y", "m_x"},
    {"C_yv", "m_y", "m_v"},
    {"D_yu", "m_y", "m_u"},
}};

constexpr std::array<Shape, 7> kLftShapes = {{
    {"E1", "m_x", "m_vp"},
    {"E2", "m_z", "m_vp"},
    {"E3", "m_y", "m_vp"},
    {"F1", "m_zp", "m_x"},
    {"F2", "m_zp", "m_v"},
    {"F3", "m_zp", "m_u"},
    {"H", "m_zp", "m_vp"},
}};

std::string line_col(const std::string& text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i + 1 < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

class Reader {
 public:
  std::vector<std::string> warnings;

  Rational rational(const json& j, const std::string& path) {
    if (j.is_number_integer()) {
      return j.is_number_unsigned() ? Rational(j.get<std::uint64_t>()) : Rational(j.get<std::int64_t>());
    }
    if (j.is_number_float()) {
      const std::string literal = j.dump();
      Rational r = parse_rational(literal);
      warnings.push_back(path + ": floating value " + literal + " converted to " + to_string(r));
      return r;
    }
    if (j.is_string()) {
      try {
        return parse_rational(j.get<std::string>());
      } catch (const std::invalid_argument&) {
        throw DocumentError(path, "not a rational number: \"" + j.get<std::string>() + "\"");
      }
    }
    throw DocumentError(path, "expected a number or a \"p/q\" string, got " + std::string(j.type_name()));
  }

  // Reads an array of rows. cols is unknown (nullopt) for an empty array.
  std::pair<RatMatrix, std::optional<std::size_t>> matrix(const json& j, const std::string& path) {
    if (!j.is_array()) throw DocumentError(path, "expected an array of rows");
    if (j.empty()) return {RatMatrix(), std::nullopt};
    std::size_t cols = 0;
    for (std::size_t r = 0; r < j.size(); ++r) {
      const std::string rp = path + "/" + std::to_string(r);
      if (!j[r].is_array()) throw DocumentError(rp, "expected a row array");
      if (r == 0) cols = j[r].size();
      if (j[r].size() != cols) {
        throw DocumentError(rp, "row has " + std::to_string(j[r].size()) + " entries, expected " + std::to_string(cols));
      }
    }
    RatMatrix m(j.size(), cols);
    for (std::size_t r = 0; r < j.size(); ++r)
      for (std::size_t c = 0; c < cols; ++c) m(r, c) = rational(j[r][c], path + "/" + std::to_string(r) + "/" + std::to_string(c));
    return {std::move(m), cols};
  }

  std::size_t count(const json& j, const std::string& path) {
    if (!j.is_number_integer() || j.get<std::int64_t>() < 0) throw DocumentError(path, "expected a non-negative integer");
    return j.get<std::size_t>();
  }

  std::vector<Position> positions(const json& j, const std::string& path, std::size_t rows, std::size_t cols) {
    std::vector<Position> out;
    if (j.is_string()) {
      if (j.get<std::string>() != "full") throw DocumentError(path, "expected \"full\" or a list of [row, col] pairs");
      for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cols; ++c) out.emplace_back(r, c);
      return out;
    }
    if (!j.is_array()) throw DocumentError(path, "expected \"full\" or a list of [row, col] pairs");
    std::set<Position> seen;
    for (std::size_t i = 0; i < j.size(); ++i) {
      const std::string ip = path + "/" + std::to_string(i);
      const json& e = j[i];
      if (!e.is_array() || e.size() != 2) throw DocumentError(ip, "expected a [row, col] pair");
      const std::size_t r = count(e[0], ip + "/0"), c = count(e[1], ip + "/1");
      if (r < 1 || r > rows || c < 1 || c > cols) {
        throw DocumentError(ip, "position [" + std::to_string(r) + ", " + std::to_string(c) + "] outside the " +
                                    std::to_string(rows) + "x" + std::to_string(cols) + " pattern (1-based)");
      }
      if (!seen.insert({r - 1, c - 1}).second) throw DocumentError(ip, "duplicate position");
      out.emplace_back(r - 1, c - 1);
    }
    return out;
  }
};

void check_keys(const json& obj, const std::string& path, const std::set<std::string>& allowed) {
  for (const auto& [k, v] : obj.items()) {
    if (!allowed.count(k)) throw DocumentError(path + "/" + k, "unknown key");
  }
}

class DimSolver {
 public:
  void set(const std::string& dim, std::size_t value, const std::string& where) {
    auto [it, inserted] = dims_.emplace(dim, std::make_pair(value, where));
    if (!inserted && it->second.first != value) {
      throw DocumentError(where, dim + " = " + std::to_string(value) + " conflicts with " + dim + " = " +
                                     std::to_string(it->second.first) + " implied by " + it->second.second);
    }
  }
  void observe(const Shape& s, const RatMatrix& m, std::optional<std::size_t> cols, const std::string& where) {
    set(s.rows, m.rows(), where);
    if (cols) set(s.cols, *cols, where);
  }
  [[nodiscard]] std::size_t get(const std::string& dim) const {
    auto it = dims_.find(dim);
    return it == dims_.end() ? 0 : it->second.first;
  }

 private:
  std::map<std::string, std::pair<std::size_t, std::string>> dims_;
};

RatMatrix shaped(const std::map<std::string, std::pair<RatMatrix, std::optional<std::size_t>>>& read,
                 const Shape& s, const DimSolver& dims) {
  const std::size_t r = dims.get(s.rows), c = dims.get(s.cols);
  auto it = read.find(s.key);
  if (it == read.end() || it->second.first.rows() == 0) return RatMatrix(r, c);
  return it->second.first;
}

SubsystemModel read_subsystem(Reader& rd, const json& j, const std::string& path, int& next_id, std::string& name) {
  if (!j.is_object()) throw DocumentError(path, "expected a subsystem object");
  std::set<std::string> allowed = {"name", "dims", "lft"};
  for (const auto& s : kPlantShapes) allowed.insert(s.key);
  check_keys(j, path, allowed);

  if (j.contains("name")) {
    if (!j["name"].is_string()) throw DocumentError(path + "/name", "expected a string");
    name = j["name"].get<std::string>();
  }
  if (!j.contains("A_xx")) throw DocumentError(path, "missing A_xx");

  DimSolver dims;
  if (j.contains("dims")) {
    const json& d = j["dims"];
    const std::string dp = path + "/dims";
    if (!d.is_object()) throw DocumentError(dp, "expected an object");
    check_keys(d, dp, {"m_x", "m_u", "m_v", "m_z", "m_y", "m_vp", "m_zp"});
    for (const auto& [k, v] : d.items()) dims.set(k, rd.count(v, dp + "/" + k), dp + "/" + k);
  }

  std::map<std::string, std::pair<RatMatrix, std::optional<std::size_t>>> read;
  for (const auto& s : kPlantShapes) {
    if (!j.contains(s.key)) continue;
    const std::string mp = path + "/" + s.key;
    read[s.key] = rd.matrix(j[s.key], mp);
    dims.observe(s, read[s.key].first, read[s.key].second, mp);
  }

  const json* lft = nullptr;
  if (j.contains("lft")) {
    lft = &j["lft"];
    const std::string lp = path + "/lft";
    if (!lft->is_object()) throw DocumentError(lp, "expected an object");
    std::set<std::string> lallowed = {"pattern", "values"};
    for (const auto& s : kLftShapes) lallowed.insert(s.key);
    check_keys(*lft, lp, lallowed);
    if (!lft->contains("H")) throw DocumentError(lp, "missing H");
    if (lft->contains("pattern") == lft->contains("values")) {
      throw DocumentError(lp, "give exactly one of \"pattern\" (free block) or \"values\" (fixed block)");
    }
    for (const auto& s : kLftShapes) {
      if (!lft->contains(s.key)) continue;
      const std::string mp = lp + "/" + s.key;
      read[s.key] = rd.matrix((*lft)[s.key], mp);
      dims.observe(s, read[s.key].first, read[s.key].second, mp);
    }
    if (lft->contains("values")) {
      const std::string mp = lp + "/values";
      auto pv = rd.matrix((*lft)["values"], mp);
      dims.observe({"values", "m_vp", "m_zp"}, pv.first, pv.second, mp);
      read["values"] = std::move(pv);
    }
  }

  // Second pass: a present matrix with rows must match the resolved dimensions.
  auto check_shape = [&](const Shape& s, const std::string& mp) {
    auto it = read.find(s.key);
    if (it == read.end()) return;
    const RatMatrix& m = it->second.first;
    const std::size_t r = dims.get(s.rows), c = dims.get(s.cols);
    if (m.rows() == 0 && r == 0) return;
    if (m.rows() != r || m.cols() != c) {
      throw DocumentError(mp, std::string(s.key) + " is " + std::to_string(m.rows()) + "x" + std::to_string(m.cols()) +
                                  ", expected " + std::to_string(r) + "x" + std::to_string(c) + " (" + s.rows + " x " +
                                  s.cols + ")");
    }
  };
  for (const auto& s : kPlantShapes) check_shape(s, path + "/" + s.key);
  for (const auto& s : kLftShapes) check_shape(s, path + "/lft/" + s.key);
  check_shape({"values", "m_vp", "m_zp"}, path + "/lft/values");

  SubsystemModel sub =
      SubsystemModel::zeros(dims.get("m_x"), dims.get("m_u"), dims.get("m_v"), dims.get("m_z"), dims.get("m_y"));
  sub.A_xx0 = shaped(read, kPlantShapes[0], dims);
  sub.A_xv0 = shaped(read, kPlantShapes[1], dims);
  sub.B_xu0 = shaped(read, kPlantShapes[2], dims);
  sub.A_zx0 = shaped(read, kPlantShapes[3], dims);
  sub.A_zv0 = shaped(read, kPlantShapes[4], dims);
  sub.B_zu0 = shaped(read, kPlantShapes[5], dims);
  sub.C_yx0 = shaped(read, kPlantShapes[6], dims);
  sub.C_yv0 = shaped(read, kPlantShapes[7], dims);
  sub.D_yu0 = shaped(read, kPlantShapes[8], dims);
  if (lft) {
    sub.E1 = shaped(read, kLftShapes[0], dims);
    sub.E2 = shaped(read, kLftShapes[1], dims);
    sub.E3 = shaped(read, kLftShapes[2], dims);
    sub.F1 = shaped(read, kLftShapes[3], dims);
    sub.F2 = shaped(read, kLftShapes[4], dims);
    sub.F3 = shaped(read, kLftShapes[5], dims);
    sub.H = shaped(read, kLftShapes[6], dims);
    const std::size_t vp = dims.get("m_vp"), zp = dims.get("m_zp");
    if (lft->contains("values")) {
      sub.param_block = shaped(read, {"values", "m_vp", "m_zp"}, dims);
    } else {
      auto pos = rd.positions((*lft)["pattern"], path + "/lft/pattern", vp, zp);
      sub.param_block = StructuredPattern::from_positions(vp, zp, pos, next_id);
      next_id += static_cast<int>(pos.size());
    }
  }
  try {
    sub.validate();
  } catch (const ModelError& e) {
    throw DocumentError(path, e.what());
  }
  return sub;
}

DocumentOptions read_options(Reader& rd, const json& j, const std::string& path) {
  if (!j.is_object()) throw DocumentError(path, "expected an object");
  check_keys(j, path, {"eig_tol", "rank_tol", "seed"});
  DocumentOptions o;
  auto tol = [&](const char* key) -> std::optional<double> {
    if (!j.contains(key)) return std::nullopt;
    const json& v = j[key];
    if (!v.is_number() || v.get<double>() <= 0) throw DocumentError(path + "/" + key, "expected a positive number");
    return v.get<double>();
  };
  o.eig_tol = tol("eig_tol");
  o.rank_tol = tol("rank_tol");
  if (j.contains("seed")) o.seed = rd.count(j["seed"], path + "/seed");
  return o;
}

bool is_plain_block(const SubsystemModel& s) {
  const auto* p = std::get_if<StructuredPattern>(&s.param_block);
  return s.H.rows() == 0 && s.H.cols() == 0 && p && p->rows() == 0 && p->cols() == 0;
}

nlohmann::ordered_json positions_json(const StructuredPattern& p) {
  nlohmann::ordered_json out = nlohmann::ordered_json::array();
  for (const auto& [r, c] : p.positions()) out.push_back({r + 1, c + 1});
  return out;
}

}  // namespace

nlohmann::ordered_json rational_to_json(const Rational& r) {
  const Integer num = boost::multiprecision::numerator(r);
  if (boost::multiprecision::denominator(r) == 1 && num >= std::numeric_limits<std::int64_t>::min() &&
      num <= std::numeric_limits<std::int64_t>::max()) {
    return num.convert_to<std::int64_t>();
  }
  return to_string(r);
}

nlohmann::ordered_json matrix_to_json(const RatMatrix& m) {
  nlohmann::ordered_json out = nlohmann::ordered_json::array();
  for (std::size_t r = 0; r < m.rows(); ++r) {
    nlohmann::ordered_json row = nlohmann::ordered_json::array();
    for (std::size_t c = 0; c < m.cols(); ++c) row.push_back(rational_to_json(m(r, c)));
    out.push_back(std::move(row));
  }
  return out;
}

NdsDocument parse_document(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    std::string msg = e.what();
    if (auto p = msg.find("syntax error"); p != std::string::npos) msg = msg.substr(p);
    throw DocumentError(line_col(text, e.byte), msg);
  }
  if (!j.is_object()) throw DocumentError("/", "expected a JSON object");
  check_keys(j, "", {"format_version", "subsystems", "scm", "options"});

  NdsDocument doc;
  Reader rd;
  if (j.contains("format_version")) {
    const json& v = j["format_version"];
    if (!v.is_number_integer() || v.get<int>() != kFormatVersion) {
      throw DocumentError("/format_version", "unsupported format version " + v.dump() + " (expected " +
                                                 std::to_string(kFormatVersion) + ")");
    }
  }
  if (!j.contains("subsystems") || !j["subsystems"].is_array() || j["subsystems"].empty()) {
    throw DocumentError("/subsystems", "expected a non-empty array of subsystems");
  }

  // SCM ids come first, so read the subsystems to size the SCM and then renumber the blocks.
  int block_id = 0;
  std::vector<SubsystemModel> subs;
  for (std::size_t i = 0; i < j["subsystems"].size(); ++i) {
    std::string name;
    subs.push_back(read_subsystem(rd, j["subsystems"][i], "/subsystems/" + std::to_string(i), block_id, name));
    doc.names.push_back(name);
  }
  doc.model.subsystems = std::move(subs);
  const std::size_t rows = doc.model.total_v0(), cols = doc.model.total_z0();
  std::vector<Position> scm_pos;
  if (j.contains("scm")) scm_pos = rd.positions(j["scm"], "/scm", rows, cols);
  doc.model.scm = StructuredPattern::from_positions(rows, cols, scm_pos);
  const int offset = static_cast<int>(scm_pos.size());
  for (auto& s : doc.model.subsystems) {
    if (auto* p = std::get_if<StructuredPattern>(&s.param_block)) {
      StructuredPattern shifted(p->rows(), p->cols());
      for (const auto& [pos, id] : p->entries()) shifted.set_free(pos.first, pos.second, id + offset);
      *p = std::move(shifted);
    }
  }
  if (j.contains("options")) doc.options = read_options(rd, j["options"], "/options");
  try {
    doc.model.validate();
  } catch (const ModelError& e) {
    throw DocumentError("/", e.what());
  }
  doc.warnings = std::move(rd.warnings);
  return doc;
}

NdsDocument load_document(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DocumentError(path, "cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_document(ss.str());
}

nlohmann::ordered_json document_to_json(const NdsDocument& doc) {
  using ojson = nlohmann::ordered_json;
  ojson out;
  out["format_version"] = doc.format_version;
  ojson subs = ojson::array();
  for (std::size_t i = 0; i < doc.model.subsystems.size(); ++i) {
    const SubsystemModel& s = doc.model.subsystems[i];
    ojson js;
    if (i < doc.names.size() && !doc.names[i].empty()) js["name"] = doc.names[i];
    js["dims"] = {{"m_x", s.m_x()}, {"m_u", s.m_u()}, {"m_v", s.m_v0()}, {"m_z", s.m_z0()}, {"m_y", s.m_y()}};
    if (!is_plain_block(s)) {
      js["dims"]["m_vp"] = s.m_vp();
      js["dims"]["m_zp"] = s.m_zp();
    }
    const std::array<const RatMatrix*, 9> plant = {&s.A_xx0, &s.A_xv0, &s.B_xu0, &s.A_zx0, &s.A_zv0,
                                                   &s.B_zu0, &s.C_yx0, &s.C_yv0, &s.D_yu0};
    for (std::size_t k = 0; k < plant.size(); ++k) {
      if (k == 0 || !plant[k]->is_zero()) js[kPlantShapes[k].key] = matrix_to_json(*plant[k]);
    }
    if (!is_plain_block(s)) {
      ojson lft;
      const std::array<const RatMatrix*, 7> blocks = {&s.E1, &s.E2, &s.E3, &s.F1, &s.F2, &s.F3, &s.H};
      for (std::size_t k = 0; k < blocks.size(); ++k) {
        if (k == 6 || !blocks[k]->is_zero()) lft[kLftShapes[k].key] = matrix_to_json(*blocks[k]);
      }
      if (const auto* p = std::get_if<StructuredPattern>(&s.param_block)) {
        lft["pattern"] = positions_json(*p);
      } else {
        lft["values"] = matrix_to_json(std::get<RatMatrix>(s.param_block));
      }
      js["lft"] = std::move(lft);
    }
    subs.push_back(std::move(js));
  }
  out["subsystems"] = std::move(subs);
  out["scm"] = positions_json(doc.model.scm);
  if (doc.options.eig_tol || doc.options.rank_tol || doc.options.seed) {
    ojson o = ojson::object();
    if (doc.options.eig_tol) o["eig_tol"] = *doc.options.eig_tol;
    if (doc.options.rank_tol) o["rank_tol"] = *doc.options.rank_tol;
    if (doc.options.seed) o["seed"] = *doc.options.seed;
    out["options"] = std::move(o);
  }
  return out;
}

std::string serialize_document(const NdsDocument& doc) { return document_to_json(doc).dump(2) + "\n"; }

bool same_document(const NdsDocument& a, const NdsDocument& b) {
  auto names = [](const NdsDocument& d) {
    auto n = d.names;
    n.resize(d.model.subsystems.size());
    return n;
  };
  if (a.format_version != b.format_version || names(a) != names(b) || !(a.options == b.options)) return false;
  if (!(a.model.scm == b.model.scm) || a.model.subsystems.size() != b.model.subsystems.size()) return false;
  for (std::size_t i = 0; i < a.model.subsystems.size(); ++i) {
    const auto& x = a.model.subsystems[i];
    const auto& y = b.model.subsystems[i];
    if (!(x.A_xx0 == y.A_xx0 && x.A_xv0 == y.A_xv0 && x.B_xu0 == y.B_xu0 && x.A_zx0 == y.A_zx0 &&
          x.A_zv0 == y.A_zv0 && x.B_zu0 == y.B_zu0 && x.C_yx0 == y.C_yx0 && x.C_yv0 == y.C_yv0 &&
          x.D_yu0 == y.D_yu0 && x.E1 == y.E1 && x.E2 == y.E2 && x.E3 == y.E3 && x.F1 == y.F1 && x.F2 == y.F2 &&
          x.F3 == y.F3 && x.H == y.H && x.param_block == y.param_block)) {
      return false;
    }
  }
  return true;
}

std::string model_digest(const NdsDocument& doc) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char ch : serialize_document(doc)) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace netctrl
