#include "lurerad/problem.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <openssl/evp.h>

#include "json.hpp"

namespace lurerad {

using nlohmann::json;

namespace {

// 1-based line of the first "key" found after each preceding key in path, or 0.
std::size_t LineOf(const std::string& text, std::initializer_list<std::string> path) {
  std::size_t pos = 0;
  for (const auto& key : path) {
    pos = text.find('"' + key + '"', pos);
    if (pos == std::string::npos) return 0;
  }
  return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + pos, '\n'));
}

class Reader {
 public:
  Reader(const std::string& text, std::string source) : text_(text), source_(std::move(source)) {}

  [[noreturn]] void Fail(std::initializer_list<std::string> path, const std::string& msg) const {
    std::string where;
    for (const auto& k : path) where += (where.empty() ? "" : ".") + k;
    const std::size_t line = LineOf(text_, path);
    throw Error(ErrorCode::kParseError,
                source_ + (line ? ":" + std::to_string(line) : "") + ": " + where + ": " + msg);
  }

  Mat Matrix(const json& j, std::initializer_list<std::string> path) const {
    if (!j.is_array() || j.empty()) Fail(path, "expected a nonempty array of rows");
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < j.size(); ++i) {
      const json& row = j[i];
      if (!row.is_array() || row.empty()) {
        Fail(path, "row " + std::to_string(i) + " is not a nonempty array");
      }
      std::vector<double> r;
      for (const auto& v : row) {
        if (!v.is_number()) Fail(path, "row " + std::to_string(i) + " has a non-numeric entry");
        const double d = v.get<double>();
        if (!std::isfinite(d)) Fail(path, "row " + std::to_string(i) + " has a non-finite entry");
        r.push_back(d);
      }
      if (!rows.empty() && r.size() != rows.front().size()) {
        Fail(path, "ragged matrix: row " + std::to_string(i) + " has " +
                       std::to_string(r.size()) + " entries, row 0 has " +
                       std::to_string(rows.front().size()));
      }
      rows.push_back(std::move(r));
    }
    return Mat::FromRows(rows);
  }

 private:
  const std::string& text_;
  std::string source_;
};

template <typename T>
std::optional<T> OptionalField(const json& obj, const char* key) {
  if (!obj.contains(key) || obj.at(key).is_null()) return std::nullopt;
  return obj.at(key).get<T>();
}

}  // namespace

LtiSystem ProblemFile::system() const {
  if (has_loop()) return LtiSystem(A, *B, *C);
  return LtiSystem(A, Mat(A.rows(), 1), Mat(1, A.rows()));
}

std::string Sha256Hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr);
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i) {
    os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
  }
  return os.str();
}

ProblemFile ParseProblem(const std::string& text, const std::string& source,
                         const std::filesystem::path& base_dir) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    const auto byte = e.byte;
    const std::size_t line =
        1 + static_cast<std::size_t>(std::count(text.begin(),
                                                text.begin() + static_cast<std::ptrdiff_t>(
                                                                   std::min(byte, text.size())),
                                                '\n'));
    throw Error(ErrorCode::kParseError,
                source + ":" + std::to_string(line) + ": malformed JSON: " + e.what());
  }
  const Reader rd(text, source);
  ProblemFile pf;
  pf.source = source;
  pf.base_dir = base_dir;
  pf.digest = Sha256Hex(text);

  try {
    if (!doc.is_object()) rd.Fail({}, "top level must be an object");
    if (!doc.contains("system")) rd.Fail({"system"}, "missing");
    const json& sys = doc.at("system");
    if (!sys.contains("A")) rd.Fail({"system", "A"}, "missing");
    pf.A = rd.Matrix(sys.at("A"), {"system", "A"});
    if (!pf.A.is_square()) rd.Fail({"system", "A"}, "must be square");
    const std::size_t n = pf.A.rows();
    if (sys.contains("B")) pf.B = rd.Matrix(sys.at("B"), {"system", "B"});
    if (sys.contains("C")) pf.C = rd.Matrix(sys.at("C"), {"system", "C"});
    if (pf.B.has_value() != pf.C.has_value()) rd.Fail({"system"}, "B and C must be given together");
    if (pf.B && pf.B->rows() != n) {
      rd.Fail({"system", "B"}, "has " + std::to_string(pf.B->rows()) + " rows, A is " +
                                   std::to_string(n) + "x" + std::to_string(n));
    }
    if (pf.C && pf.C->cols() != n) {
      rd.Fail({"system", "C"}, "has " + std::to_string(pf.C->cols()) + " columns, A is " +
                                   std::to_string(n) + "x" + std::to_string(n));
    }

    if (!doc.contains("perturbation")) rd.Fail({"perturbation"}, "missing");
    const json& pj = doc.at("perturbation");
    for (const char* k : {"D", "E"}) {
      if (!pj.contains(k)) rd.Fail({"perturbation", k}, "missing");
    }
    const Mat d = rd.Matrix(pj.at("D"), {"perturbation", "D"});
    const Mat e = rd.Matrix(pj.at("E"), {"perturbation", "E"});
    if (d.rows() != n) rd.Fail({"perturbation", "D"}, "must have " + std::to_string(n) + " rows");
    if (e.cols() != n) rd.Fail({"perturbation", "E"}, "must have " + std::to_string(n) + " columns");
    const NormKind norm =
        pj.contains("norm") ? ParseNormKind(pj.at("norm").get<std::string>()) : NormKind::kTwo;
    std::optional<Mat> s;
    if (pj.contains("S")) s = rd.Matrix(pj.at("S"), {"perturbation", "S"});
    try {
      pf.pert = PerturbationStructure(d, e, norm, s);
    } catch (const Error& err) {
      rd.Fail({"perturbation"}, err.what());
    }

    int kinds = 0;
    if (doc.contains("sector")) {
      ++kinds;
      const json& sj = doc.at("sector");
      for (const char* k : {"Sigma1", "Sigma2"}) {
        if (!sj.contains(k)) rd.Fail({"sector", k}, "missing");
      }
      SectorBound sb{rd.Matrix(sj.at("Sigma1"), {"sector", "Sigma1"}),
                     rd.Matrix(sj.at("Sigma2"), {"sector", "Sigma2"})};
      if (!pf.has_loop()) rd.Fail({"sector"}, "a sector needs system.B and system.C");
      for (const auto* m : {&sb.lower, &sb.upper}) {
        if (m->rows() != pf.B->cols() || m->cols() != pf.C->rows()) {
          rd.Fail({"sector"}, "Sigma matrices must be " + std::to_string(pf.B->cols()) + "x" +
                                  std::to_string(pf.C->rows()));
        }
      }
      pf.sector = std::move(sb);
    }
    if (doc.contains("network")) {
      ++kinds;
      if (!pf.has_loop()) rd.Fail({"network"}, "a network needs system.B and system.C");
      pf.network = base_dir / doc.at("network").get<std::string>();
    }
    if (doc.contains("builtin_nonlinearity")) {
      ++kinds;
      if (!pf.has_loop()) rd.Fail({"builtin_nonlinearity"}, "needs system.B and system.C");
      pf.builtin_nonlinearity = doc.at("builtin_nonlinearity").get<std::string>();
      if (pf.B->cols() != pf.C->rows()) {
        rd.Fail({"builtin_nonlinearity"}, "scalar nonlinearities need as many inputs as outputs");
      }
    }
    if (kinds > 1) {
      rd.Fail({}, "give at most one of 'sector', 'network', 'builtin_nonlinearity'");
    }

    if (doc.contains("simulation")) {
      const json& sj = doc.at("simulation");
      pf.simulation.dt = OptionalField<double>(sj, "dt");
      pf.simulation.horizon = OptionalField<double>(sj, "horizon");
      pf.simulation.trials = OptionalField<int>(sj, "trials");
      pf.simulation.seed = OptionalField<std::uint64_t>(sj, "seed");
      pf.simulation.delta_max = OptionalField<double>(sj, "delta_max");
      pf.simulation.tol = OptionalField<double>(sj, "tol");
    }
    if (doc.contains("sweep")) {
      std::vector<double> deltas;
      for (const auto& v : doc.at("sweep")) {
        if (!v.is_number()) rd.Fail({"sweep"}, "must be an array of numbers");
        deltas.push_back(v.get<double>());
      }
      pf.sweep = std::move(deltas);
    }
    if (doc.contains("direction")) {
      pf.direction = rd.Matrix(doc.at("direction"), {"direction"});
      if (pf.direction->rows() != pf.pert.in_dim() || pf.direction->cols() != pf.pert.out_dim()) {
        rd.Fail({"direction"}, "must match the perturbation shape");
      }
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParseError, source + ": " + e.what());
  }
  return pf;
}

ProblemFile LoadProblem(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open problem file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ParseProblem(ss.str(), path.filename().string(), path.parent_path());
}

}  // namespace lurerad
