#include "cvrep/report.hpp"

#include <openssl/evp.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace cvrep {

void Table::add_row(std::vector<std::string> cells) {
  if (cells.size() != columns.size()) {
    throw std::logic_error("table row has " + std::to_string(cells.size()) + " cells, expected " +
                           std::to_string(columns.size()));
  }
  rows.push_back(std::move(cells));
}

std::string format_number(double x) {
  if (!std::isfinite(x)) throw std::domain_error("refusing to write a non-finite value");
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", x);
  return buf;
}

std::string format_number(const std::optional<double>& x) { return x ? format_number(*x) : std::string{}; }

std::string format_list(const std::vector<double>& xs) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) out += ';';
    out += format_number(xs[i]);
  }
  return out;
}

Table result_table(const std::vector<ResultRow>& rows) {
  Table t;
  t.columns = {
      {"distance_km", "km"},      {"n_links", "1"},         {"chi", "1"},
      {"gain", "1"},              {"gain_max", "1"},        {"gamma_max", "1"},       {"lambda_a", "1"},
      {"lambda_b", "1"},          {"eta_link", "1"},        {"p_nla", "1"},
      {"p_ps", "1"},              {"r_rep", "1/attempt"},   {"i_ab", "bit"},
      {"i_be", "bit"},            {"key", "bit/use"},       {"secret_key_rate", "bit/attempt"},
      {"eof", "ebit"},            {"plob", "bit/use"},      {"direct_key", "bit/use"},
      {"eof_direct_inf", "ebit"}, {"bound", "-"},           {"protocol", "-"},
      {"nu_min", "1"},            {"ps_residual", "1"},     {"completeness", "1"},
      {"evaluations", "1"},       {"converged", "-"},       {"gain_above_soft_cap", "-"},
  };
  for (const ResultRow& r : rows) {
    // p_ps is stored final swap first; the table lists every level base first
    const std::vector<double> p_ps(r.p_ps.rbegin(), r.p_ps.rend());
    std::vector<double> la, lb;
    for (const auto& g : r.lambdas) {
      la.push_back(g.lambda_a);
      lb.push_back(g.lambda_b);
    }
    t.add_row({format_number(r.distance_km), std::to_string(r.n_links), format_number(r.chi),
               format_number(r.gain), format_number(r.gain_max), format_list(r.gamma_max), format_list(la), format_list(lb),
               format_number(r.eta_link), format_number(r.p_nla), format_list(p_ps), format_number(r.r_rep),
               format_number(r.i_ab), format_number(r.i_be), format_number(r.key),
               format_number(r.secret_key_rate), format_number(r.eof), format_number(r.plob),
               format_number(r.direct_key), format_number(r.eof_direct_inf), to_string(r.bound),
               to_string(r.protocol), format_number(r.nu_min), format_number(r.ps_residual),
               format_number(r.completeness), std::to_string(r.evaluations), r.converged ? "1" : "0",
               r.gain_above_soft_cap ? "1" : "0"});
  }
  return t;
}

std::string git_blob_sha1(std::string_view content) {
  const std::string header = "blob " + std::to_string(content.size()) + '\0';
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  if (!ctx || EVP_DigestInit_ex(ctx, EVP_sha1(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx, header.data(), header.size()) != 1 ||
      EVP_DigestUpdate(ctx, content.data(), content.size()) != 1 || EVP_DigestFinal_ex(ctx, digest, &len) != 1) {
    EVP_MD_CTX_free(ctx);
    throw std::runtime_error("SHA-1 digest failed");
  }
  EVP_MD_CTX_free(ctx);
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 0xf];
  }
  return out;
}

std::string csv_body(const Table& table) {
  std::string out;
  for (std::size_t i = 0; i < table.columns.size(); ++i) {
    if (i) out += ',';
    out += table.columns[i].name;
  }
  out += '\n';
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      out += row[i];
    }
    out += '\n';
  }
  return out;
}

std::string render_csv(const Table& table, const std::string& config_hash) {
  std::string out = "# cvrepeater result table\n";
  out += "# schema_version: " + std::to_string(kSchemaVersion) + "\n";
  out += "# config_hash: " + config_hash + "\n";
  out += "# note: key rates and EOF are computed from the Gaussian covariance matrix of the output state\n";
  out += "# units:";
  for (const auto& c : table.columns) out += " " + c.name + "=" + c.unit;
  out += "\n";
  return out + csv_body(table);
}

WrittenOutput write_outputs(const std::filesystem::path& path, const Table& table, const nlohmann::json& config,
                            const nlohmann::json& summary) {
  WrittenOutput w;
  w.csv = path;
  w.sidecar = path;
  w.sidecar += ".json";
  w.config_hash = git_blob_sha1(config.dump());
  w.body_hash = git_blob_sha1(csv_body(table));
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  {
    std::ofstream f(w.csv, std::ios::binary);
    f << render_csv(table, w.config_hash);
    if (!f) throw std::runtime_error("cannot write " + w.csv.string());
  }
  nlohmann::json side;
  side["schema_version"] = kSchemaVersion;
  side["config"] = config;
  side["config_hash"] = w.config_hash;
  side["body_hash"] = w.body_hash;
  side["rows"] = table.rows.size();
  nlohmann::json cols = nlohmann::json::array();
  for (const auto& c : table.columns) cols.push_back({{"name", c.name}, {"unit", c.unit}});
  side["columns"] = cols;
  side["summary"] = summary;
  std::ofstream f(w.sidecar, std::ios::binary);
  f << side.dump(2) << '\n';
  if (!f) throw std::runtime_error("cannot write " + w.sidecar.string());
  return w;
}

}  // namespace cvrep
