#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "netctrl/model.hpp"

namespace netctrl {

// Parse or shape error; where() is a JSON pointer or "line L, column C".
class DocumentError : public std::runtime_error {
 public:
  DocumentError(std::string where, const std::string& what)
      : std::runtime_error(where + ": " + what), where_(std::move(where)) {}
  [[nodiscard]] const std::string& where() const { return where_; }

 private:
  std::string where_;
};

constexpr int kFormatVersion = 1;

struct DocumentOptions {
  std::optional<double> eig_tol;
  std::optional<double> rank_tol;
  std::optional<std::uint64_t> seed;
  friend bool operator==(const DocumentOptions&, const DocumentOptions&) = default;
};

struct NdsDocument {
  int format_version = kFormatVersion;
  std::vector<std::string> names;  // one per subsystem, may be empty strings
  NdsModel model;
  DocumentOptions options;
  std::vector<std::string> warnings;  // not serialized
};

NdsDocument parse_document(const std::string& text);
NdsDocument load_document(const std::string& path);

nlohmann::ordered_json document_to_json(const NdsDocument& doc);
std::string serialize_document(const NdsDocument& doc);

// Same model, names and options (warnings ignored).
bool same_document(const NdsDocument& a, const NdsDocument& b);

// FNV-1a 64 of the canonical serialization, as 16 hex digits.
std::string model_digest(const NdsDocument& doc);

nlohmann::ordered_json rational_to_json(const Rational& r);
nlohmann::ordered_json matrix_to_json(const RatMatrix& m);

}  // namespace netctrl
