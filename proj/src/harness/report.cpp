#include "segflow/harness/report.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <memory>
#include <stdexcept>

#include <openssl/evp.h>

namespace segflow {

namespace {

using nlohmann::json;

std::string digest_hex(const EVP_MD* md, std::string_view prefix, std::string_view data) {
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
  std::array<unsigned char, EVP_MAX_MD_SIZE> out{};
  unsigned int len = 0;
  if (!ctx || EVP_DigestInit_ex(ctx.get(), md, nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), prefix.data(), prefix.size()) != 1 ||
      EVP_DigestUpdate(ctx.get(), data.data(), data.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), out.data(), &len) != 1) {
    throw std::runtime_error("digest computation failed");
  }
  static constexpr char hex[] = "0123456789abcdef";
  std::string s;
  s.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    s.push_back(hex[out[i] >> 4]);
    s.push_back(hex[out[i] & 0xf]);
  }
  return s;
}

std::string canonical_inputs(const json& config) {
  json c = config;
  c.erase("output_dir");
  return c.dump();
}

std::string num(double v) {
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

class CsvWriter {
public:
  CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header)
      : path_(path), out_(path, std::ios::binary) {
    if (!out_) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
    row_strings(header);
  }

  void row(const std::vector<double>& values) {
    std::vector<std::string> cells;
    cells.reserve(values.size());
    for (double v : values) cells.push_back(num(v));
    row_strings(cells);
  }

  void close() {
    out_.close();
    if (!out_) throw std::runtime_error("write to '" + path_.string() + "' failed");
  }

private:
  void row_strings(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out_ << ',';
      out_ << cells[i];
    }
    out_ << '\n';
  }

  std::filesystem::path path_;
  std::ofstream out_;
};

std::vector<double> doubles(const json& section, const char* key) {
  if (!section.contains(key)) return {};
  return section[key].get<std::vector<double>>();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  out << text << '\n';
  out.close();
  if (!out) throw std::runtime_error("write to '" + path.string() + "' failed");
}

} // namespace

std::string sha256_hex(std::string_view data) { return digest_hex(EVP_sha256(), {}, data); }

std::string git_blob_sha1(std::string_view data) {
  const std::string header = "blob " + std::to_string(data.size()) + std::string(1, '\0');
  return digest_hex(EVP_sha1(), header, data);
}

void seal(ReportRecord& record) {
  const std::string inputs = canonical_inputs(record.config);
  record.config_hash = sha256_hex(inputs);
  record.input_digest = git_blob_sha1(inputs);
  record.payload_digest = sha256_hex(record.payload.dump());
  record.experiment_id = record.config.value("kind", std::string("run")) + "-" + record.config_hash.substr(0, 12);
}

json ReportRecord::to_json() const {
  return {{"experiment_id", experiment_id},   {"config_hash", config_hash},
          {"input_digest", input_digest},     {"payload_digest", payload_digest},
          {"seed", seed},                     {"wall_clock_seconds", wall_clock_seconds},
          {"passed", passed},                 {"config", config},
          {"payload", payload}};
}

std::vector<std::filesystem::path> emit_plot_data(const ReportRecord& record,
                                                  const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> written;
  const json& p = record.payload;

  if (p.contains("ergodicity")) {
    const auto& s = p["ergodicity"];
    const auto t = doubles(s, "times");
    const auto w = doubles(s, "distances");
    std::vector<bool> usable(t.size(), true);
    if (s.contains("usable")) usable = s["usable"].get<std::vector<bool>>();
    const double c = s.contains("fit") ? s["fit"].value("c_hat", 0.0) : 0.0;
    const double beta = s.contains("fit") ? s["fit"].value("beta_hat", 0.0) : 0.0;
    const auto path = dir / "ergodicity.csv";
    CsvWriter csv(path, {"t", "W", "log_W", "fit"});
    for (std::size_t i = 0; i < t.size(); ++i) {
      if (!usable[i] || !(w[i] > 0.0)) continue;
      csv.row({t[i], w[i], std::log(w[i]), c * std::exp(-beta * t[i])});
    }
    csv.close();
    written.push_back(path);
  }
  if (p.contains("slln")) {
    const auto& s = p["slln"];
    const auto t = doubles(s, "times");
    const auto mse = doubles(s, "sq_errors");
    const double c_env = s.value("c_env", 0.0);
    const auto path = dir / "slln.csv";
    CsvWriter csv(path, {"t", "mse", "envelope"});
    for (std::size_t i = 0; i < t.size(); ++i) csv.row({t[i], mse[i], c_env / t[i]});
    csv.close();
    written.push_back(path);
  }
  if (p.contains("clt")) {
    const auto& s = p["clt"];
    const auto t = doubles(s, "times");
    const auto ks = doubles(s, "statistics");
    const auto path = dir / "clt.csv";
    CsvWriter csv(path, {"t", "ks", "bound_shape"});
    for (std::size_t i = 0; i < t.size(); ++i) csv.row({t[i], ks[i], std::pow(t[i], -0.25)});
    csv.close();
    written.push_back(path);
  }
  if (p.contains("lil")) {
    const auto& s = p["lil"];
    const auto n = doubles(s, "n_grid");
    const auto sums = doubles(s, "normalized_sums");
    const auto hi = doubles(s, "running_max");
    const auto lo = doubles(s, "running_min");
    const double d = s.value("d_hat", 0.0);
    const auto path = dir / "lil.csv";
    CsvWriter csv(path, {"n", "normalized_sum", "running_max", "running_min", "plus_D", "minus_D"});
    for (std::size_t i = 0; i < n.size(); ++i) csv.row({n[i], sums[i], hi[i], lo[i], d, -d});
    csv.close();
    written.push_back(path);
  }
  return written;
}

void write_report(const ReportRecord& record, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_text(dir / "report.json", record.to_json().dump(2));
  write_text(dir / "config.echo.json", record.config.dump(2));
}

} // namespace segflow
