#pragma once

// JSON, MatrixMarket and CSV encodings of matrices, chains and spectra.
// Doubles are written in shortest round-trip form so files reload bit-exactly.

#include <charconv>
#include <cmath>
#include <complex>
#include <fstream>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include <json.hpp>

#include "cyclegap/chain.hpp"
#include "cyclegap/error.hpp"
#include "cyclegap/interconnect.hpp"
#include "cyclegap/spectral.hpp"

namespace cyclegap {

using json = nlohmann::json;

/// Shortest decimal that reads back as the same double; "nan"/"inf"/"-inf"
/// for non-finite values. Locale independent.
inline std::string format_roundtrip(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

/// `digits` significant digits, general notation. Locale independent.
inline std::string format_sig(double x, int digits = 12) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[48];
  const auto res = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, digits);
  return std::string(buf, res.ptr);
}

/// Inverse of format_roundtrip; empty or malformed text is a parse error.
inline double parse_double(std::string_view text) {
  if (text == "nan") return std::nan("");
  if (text == "inf") return INFINITY;
  if (text == "-inf") return -INFINITY;
  double value = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    throw Error(Errc::Parse, "not a number: '" + std::string(text) + "'");
  }
  return value;
}

template <class Int>
Int parse_integer(std::string_view text) {
  Int value{};
  const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    throw Error(Errc::Parse, "not an integer: '" + std::string(text) + "'");
  }
  return value;
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::Io, "cannot open '" + path + "' for reading");
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw Error(Errc::Io, "read error on '" + path + "'");
  return buf.str();
}

inline void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::Io, "cannot open '" + path + "' for writing");
  out << content;
  out.flush();
  if (!out) throw Error(Errc::Io, "write error on '" + path + "'");
}

inline json parse_json_text(const std::string& text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw Error(Errc::Parse, what + ": " + e.what());
  }
}

namespace detail {

template <class T>
T json_field(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw Error(Errc::Parse, std::string("missing field '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw Error(Errc::Parse, std::string("field '") + key + "' has the wrong type");
  }
}

}  // namespace detail

// --- InterconnectMatrix: {"k", "kind", "entries": row-major flat array} ---

inline json to_json(const InterconnectMatrix& a) {
  json entries = json::array();
  for (int i = 0; i < a.k(); ++i) {
    for (int j = 0; j < a.k(); ++j) entries.push_back(a(i, j));
  }
  return json{{"k", a.k()}, {"kind", to_string(a.kind())}, {"entries", entries}};
}

/// Accepts the flat row-major array written by to_json, or nested rows.
inline InterconnectMatrix interconnect_from_json(const json& j) {
  const int k = detail::json_field<int>(j, "k");
  if (k < 1) throw Error(Errc::InvalidDimension, "k must be >= 1");
  const auto kind = parse_interconnect_kind(detail::json_field<std::string>(j, "kind"));
  if (!j.is_object() || !j.contains("entries")) throw Error(Errc::Parse, "missing field 'entries'");
  const json& entries = j.at("entries");
  std::vector<double> flat;
  try {
    if (entries.is_array() && !entries.empty() && entries.front().is_array()) {
      for (const auto& row : entries) {
        if (row.size() != static_cast<std::size_t>(k)) throw Error(Errc::DimensionMismatch, "row length differs from k");
        for (const auto& v : row) flat.push_back(v.get<double>());
      }
    } else {
      flat = entries.get<std::vector<double>>();
    }
  } catch (const json::exception&) {
    throw Error(Errc::Parse, "entries must be numbers");
  }
  if (flat.size() != static_cast<std::size_t>(k) * static_cast<std::size_t>(k)) {
    throw Error(Errc::DimensionMismatch, "entries must hold k*k values");
  }
  Eigen::MatrixXd m(k, k);
  for (int i = 0; i < k; ++i) {
    for (int c = 0; c < k; ++c) m(i, c) = flat[static_cast<std::size_t>(i) * k + c];
  }
  return InterconnectMatrix(std::move(m), kind);
}

// --- CondensedChain ---

inline json to_json(const CondensedChain& chain) {
  json provenance;
  if (const auto* arc = std::get_if<ArcmodOrigin>(&chain.provenance())) {
    provenance = {{"type", "arcmod"}, {"L", arc->L}};
  } else {
    const auto& cyc = std::get<CyclemodOrigin>(chain.provenance());
    provenance = {{"type", "cyclemod"}, {"n", cyc.n}, {"j", cyc.j}};
  }
  const auto lengths = chain.lengths().values();
  return json{{"k", chain.k()},
              {"lengths", std::vector<std::int64_t>(lengths.begin(), lengths.end())},
              {"provenance", provenance},
              {"A", to_json(chain.interconnect())}};
}

inline CondensedChain chain_from_json(const json& j) {
  const int k = detail::json_field<int>(j, "k");
  auto lengths = detail::json_field<std::vector<std::int64_t>>(j, "lengths");
  if (lengths.size() != static_cast<std::size_t>(k)) throw Error(Errc::DimensionMismatch, "lengths must hold k values");
  if (!j.contains("A")) throw Error(Errc::Parse, "missing field 'A'");
  auto a = interconnect_from_json(j.at("A"));
  if (!j.contains("provenance")) throw Error(Errc::Parse, "missing field 'provenance'");
  const json& p = j.at("provenance");
  const auto type = detail::json_field<std::string>(p, "type");
  Provenance provenance;
  if (type == "arcmod") {
    provenance = ArcmodOrigin{detail::json_field<double>(p, "L")};
  } else if (type == "cyclemod") {
    provenance = CyclemodOrigin{detail::json_field<std::int64_t>(p, "n"), detail::json_field<std::int64_t>(p, "j")};
  } else {
    throw Error(Errc::Parse, "provenance type must be 'arcmod' or 'cyclemod'");
  }
  return CondensedChain(std::move(a), ArcLengths(std::move(lengths)), provenance);
}

// --- StochasticMatrix as MatrixMarket coordinate (1-based) ---

inline std::string to_matrix_market(const StochasticMatrix& m) {
  std::string out = "%%MatrixMarket matrix coordinate real general\n";
  out += std::to_string(m.size()) + " " + std::to_string(m.size()) + " " + std::to_string(m.nonzeros()) + "\n";
  for (const auto& e : m.entries()) {
    out += std::to_string(e.row + 1) + " " + std::to_string(e.col + 1) + " " + format_roundtrip(e.value) + "\n";
  }
  return out;
}

// --- Spectrum CSV (re, im, modulus) and EigenPair JSON ---

inline std::string spectrum_csv(const Spectrum& spec) {
  std::string out = "re,im,modulus\n";
  for (const auto& mu : spec.eigenvalues) {
    out += format_roundtrip(mu.real()) + "," + format_roundtrip(mu.imag()) + "," + format_roundtrip(std::abs(mu)) + "\n";
  }
  return out;
}

inline json to_json(const EigenPair& pair) {
  json vec = json::array();
  for (Eigen::Index i = 0; i < pair.vector.size(); ++i) vec.push_back({pair.vector(i).real(), pair.vector(i).imag()});
  return json{{"mu", {pair.mu.real(), pair.mu.imag()}}, {"vector", vec}};
}

inline EigenPair eigenpair_from_json(const json& j) {
  const auto mu = detail::json_field<std::vector<double>>(j, "mu");
  const auto vec = detail::json_field<std::vector<std::vector<double>>>(j, "vector");
  if (mu.size() != 2) throw Error(Errc::Parse, "mu must be [re, im]");
  EigenPair pair{{mu[0], mu[1]}, Eigen::VectorXcd(static_cast<Eigen::Index>(vec.size()))};
  for (std::size_t i = 0; i < vec.size(); ++i) {
    if (vec[i].size() != 2) throw Error(Errc::Parse, "vector entries must be [re, im]");
    pair.vector(static_cast<Eigen::Index>(i)) = {vec[i][0], vec[i][1]};
  }
  return pair;
}

}  // namespace cyclegap
