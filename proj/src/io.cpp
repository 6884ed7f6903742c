#include "smi/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "smi/errors.hpp"

namespace smi::io {

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& text) {
  if (text == "inf") return std::numeric_limits<double>::infinity();
  if (text == "-inf") return -std::numeric_limits<double>::infinity();
  if (text == "nan") return std::numeric_limits<double>::quiet_NaN();
  double x = 0.0;
  const char* end = text.data() + text.size();
  const auto res = std::from_chars(text.data(), end, x);
  if (res.ec != std::errc() || res.ptr != end) throw data_error("not a number: '" + text + "'");
  return x;
}

long long parse_int(const std::string& text) {
  long long x = 0;
  const char* end = text.data() + text.size();
  const auto res = std::from_chars(text.data(), end, x);
  if (res.ec != std::errc() || res.ptr != end) throw data_error("not an integer: '" + text + "'");
  return x;
}

std::size_t CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return i;
  throw data_error("CSV has no column '" + name + "'");
}

namespace {

std::vector<std::string> split_line(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ','))
    out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

} // namespace

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open '" + path.string() + "' for reading");
  CsvTable table;
  std::string line;
  if (!std::getline(in, line)) throw data_error("'" + path.string() + "' is empty, header row required");
  table.header = split_line(line);
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    auto row = split_line(line);
    if (row.size() != table.header.size())
      throw data_error("'" + path.string() + "' line " + std::to_string(lineno) + ": expected " +
                       std::to_string(table.header.size()) + " fields, got " + std::to_string(row.size()));
    table.rows.push_back(std::move(row));
  }
  return table;
}

CsvWriter::CsvWriter(const std::vector<std::string>& header) {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (i) text_ += ',';
    text_ += header[i];
  }
  text_ += '\n';
}

CsvWriter& CsvWriter::cell(const std::string& text) {
  if (row_open_) text_ += ',';
  text_ += text;
  row_open_ = true;
  return *this;
}

CsvWriter& CsvWriter::cell(double x) { return cell(format_double(x)); }
CsvWriter& CsvWriter::cell(long long x) { return cell(std::to_string(x)); }

void CsvWriter::end_row() {
  text_ += '\n';
  row_open_ = false;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  if (ec) throw io_error("cannot create directory '" + path.parent_path().string() + "': " + ec.message());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw io_error("cannot open '" + path.string() + "' for writing");
  out << text;
  out.close();
  if (!out) throw io_error("failed writing '" + path.string() + "'");
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot open '" + path.string() + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Observations read_value_csv(const std::filesystem::path& path) {
  const CsvTable table = read_csv(path);
  const std::size_t col = table.column("value");
  Observations out(static_cast<Index>(table.rows.size()), 1);
  for (std::size_t i = 0; i < table.rows.size(); ++i)
    out(static_cast<Index>(i), 0) = parse_double(table.rows[i][col]);
  if (out.rows() == 0) throw data_error("'" + path.string() + "' has no data rows");
  if (!out.allFinite()) throw data_error("'" + path.string() + "' contains non-finite values");
  return out;
}

void write_value_csv(const std::filesystem::path& path, const Vector& values) {
  CsvWriter w({"value"});
  for (Index i = 0; i < values.size(); ++i) {
    w.cell(values(i));
    w.end_row();
  }
  write_text(path, w.str());
}

void write_samples(const std::filesystem::path& csv_path, const mcmc::SampleMatrix& samples) {
  CsvWriter w(samples.names);
  for (Index s = 0; s < samples.rows(); ++s) {
    for (Index j = 0; j < samples.cols(); ++j)
      w.cell(samples.draws(s, j));
    w.end_row();
  }
  write_text(csv_path, w.str());

  auto vec = [](const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); };
  nlohmann::ordered_json meta;
  meta["seed"] = samples.seed;
  meta["draws"] = samples.rows();
  meta["accept_rate"] = samples.accept_rate;
  meta["all_rejected"] = samples.all_rejected;
  meta["scales"] = vec(samples.scales);
  if (samples.eta >= 0.0) {
    meta["eta"] = samples.eta;
    meta["stage2_mode"] = mcmc::to_string(samples.stage2_mode);
    meta["stage2_accept_rate"] = samples.stage2_accept_rate;
    meta["stage2_zero_accept"] = samples.stage2_zero_accept;
    meta["stage2_scales"] = vec(samples.stage2_scales);
  }
  std::filesystem::path json_path = csv_path;
  json_path.replace_extension(".json");
  write_text(json_path, meta.dump(2) + "\n");
}

} // namespace smi::io
