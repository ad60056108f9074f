#include "viscoid/bundle.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "viscoid/errors.hpp"

namespace viscoid {

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view text, std::string_view context) {
  while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
  while (!text.empty() && (text.back() == ' ' || text.back() == '\t')) text.remove_suffix(1);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
    throw FormatError("not a number '" + std::string(text) + "' in " + std::string(context));
  }
  return v;
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

namespace {

std::vector<std::string> split_fields(std::string_view line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(std::move(cur));
  return out;
}

std::vector<std::string_view> lines_of(std::string_view text) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (start < text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    out.push_back(line);
    start = end + 1;
  }
  return out;
}

}  // namespace

CsvTable read_csv(const std::filesystem::path& path) {
  const std::string text = read_text(path);
  const auto lines = lines_of(text);
  if (lines.empty() || lines.front().empty()) throw FormatError(path.string() + ": missing header");
  CsvTable t;
  t.header = split_fields(lines.front());
  t.columns.assign(t.header.size(), {});
  for (std::size_t r = 1; r < lines.size(); ++r) {
    if (lines[r].empty()) {
      if (r + 1 == lines.size()) break;
      throw FormatError(path.string() + ": empty line " + std::to_string(r + 1));
    }
    const auto fields = split_fields(lines[r]);
    if (fields.size() != t.header.size()) {
      throw FormatError(path.string() + ": line " + std::to_string(r + 1) + " has " +
                        std::to_string(fields.size()) + " fields, header has " +
                        std::to_string(t.header.size()));
    }
    for (std::size_t c = 0; c < fields.size(); ++c) {
      t.columns[c].push_back(parse_double(fields[c], path.string()));
    }
  }
  return t;
}

void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& columns) {
  if (header.size() != columns.size()) throw StructuralError("csv header/column count mismatch");
  const std::size_t rows = columns.empty() ? 0 : columns.front().size();
  for (const auto& c : columns) {
    if (c.size() != rows) throw StructuralError("csv columns of unequal length");
  }
  std::string out;
  for (std::size_t c = 0; c < header.size(); ++c) out += (c ? "," : "") + header[c];
  out += "\r\n";
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < columns.size(); ++c) {
      if (c) out += ',';
      out += format_double(columns[c][r]);
    }
    out += "\r\n";
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw FormatError("cannot write " + path.string());
  f << out;
}

std::map<std::string, std::string> parse_key_values(std::string_view text, std::string_view source) {
  std::map<std::string, std::string> out;
  int number = 0;
  for (std::string_view line : lines_of(text)) {
    ++number;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    while (!line.empty() && std::isspace(static_cast<unsigned char>(line.front()))) line.remove_prefix(1);
    while (!line.empty() && std::isspace(static_cast<unsigned char>(line.back()))) line.remove_suffix(1);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const std::string where = std::string(source) + ":" + std::to_string(number);
    if (eq == std::string_view::npos) throw FormatError(where + ": expected key=value");
    std::string_view key = line.substr(0, eq), value = line.substr(eq + 1);
    while (!key.empty() && std::isspace(static_cast<unsigned char>(key.back()))) key.remove_suffix(1);
    while (!value.empty() && std::isspace(static_cast<unsigned char>(value.front()))) value.remove_prefix(1);
    if (key.empty()) throw FormatError(where + ": empty key");
    if (!out.emplace(std::string(key), std::string(value)).second) {
      throw FormatError(where + ": duplicate key '" + std::string(key) + "'");
    }
  }
  return out;
}

// ---------------------------------------------------------------- bundle

namespace {

constexpr const char* kManifest = "manifest";

const std::string& require(const std::map<std::string, std::string>& kv, const std::string& key) {
  const auto it = kv.find(key);
  if (it == kv.end()) throw FormatError("manifest: missing key '" + key + "'");
  return it->second;
}

int to_int(const std::string& s, const std::string& key) {
  int v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) throw FormatError("manifest: bad integer for " + key);
  return v;
}

void check_time_column(const std::vector<double>& t, const TimeGrid& g, const std::string& file) {
  if (static_cast<int>(t.size()) != g.nodes()) {
    throw FormatError(file + ": " + std::to_string(t.size()) + " rows, manifest implies " +
                      std::to_string(g.nodes()));
  }
  for (int k = 0; k < g.nodes(); ++k) {
    if (std::abs(t[static_cast<std::size_t>(k)] - g.t(k)) > 1e-9 * std::max(1.0, g.t_max())) {
      throw FormatError(file + ": time column does not match the manifest grid at row " +
                        std::to_string(k + 2));
    }
  }
}

void check_header(const CsvTable& t, const std::vector<std::string>& expected, const std::string& file) {
  if (t.header != expected) {
    std::string want;
    for (const auto& h : expected) want += (want.empty() ? "" : ",") + h;
    throw FormatError(file + ": header must be " + want);
  }
}

std::vector<std::string> indexed(const std::string& first, const std::string& prefix, int n) {
  std::vector<std::string> h{first};
  for (int j = 1; j <= n; ++j) h.push_back(prefix + std::to_string(j));
  return h;
}

}  // namespace

void save_bundle(const Dataset& data, const std::filesystem::path& dir) {
  const ResponseTable& tab = data.table;
  tab.validate();
  std::filesystem::create_directories(dir);
  const TimeGrid& bg = tab.basis.grid;
  const TimeGrid dg = tab.data_grid();
  const int n = tab.basis.size();

  std::string manifest;
  manifest += "format_version=1\n";
  manifest += "L=" + format_double(data.L) + "\n";
  manifest += "T_max=" + format_double(bg.t_max()) + "\n";
  manifest += "dt=" + format_double(bg.dt()) + "\n";
  manifest += "n_basis=" + std::to_string(n) + "\n";
  manifest += "kernel_kind=" + data.kernel_kind + "\n";
  manifest += "created_by=" + data.created_by + "\n";
  manifest += "meta=" + tab.meta + "\n";
  {
    std::ofstream f(dir / kManifest, std::ios::binary);
    if (!f) throw FormatError("cannot write " + (dir / kManifest).string());
    f << manifest;
  }

  const MemoryKernel k = tab.kernel.truncated(dg.steps());
  std::vector<double> t(static_cast<std::size_t>(dg.nodes()));
  for (int i = 0; i < dg.nodes(); ++i) t[static_cast<std::size_t>(i)] = dg.t(i);
  write_csv(dir / "kernel.csv", {"t", "N", "N1", "N2", "N3"},
            {t, k.N.data(), k.N1.data(), k.N2.data(), k.N3.data()});

  std::vector<std::vector<double>> cols;
  std::vector<double> tb(static_cast<std::size_t>(bg.nodes()));
  for (int i = 0; i < bg.nodes(); ++i) tb[static_cast<std::size_t>(i)] = bg.t(i);
  cols.push_back(tb);
  for (int j = 0; j < n; ++j) cols.push_back(tab.basis.function(j).data());
  write_csv(dir / "basis.csv", indexed("t", "e", n), cols);

  cols.clear();
  cols.push_back(t);
  for (const auto& y : tab.Y) cols.push_back(y.data());
  write_csv(dir / "response.csv", indexed("t", "y", n), cols);

  if (data.q_true) {
    const TimeGrid& sg = data.q_true->grid();
    std::vector<double> x(static_cast<std::size_t>(sg.nodes()));
    for (int i = 0; i < sg.nodes(); ++i) x[static_cast<std::size_t>(i)] = sg.t(i);
    write_csv(dir / "q_true.csv", {"x", "q"}, {x, data.q_true->data()});
  } else {
    std::filesystem::remove(dir / "q_true.csv");
  }
}

Dataset load_bundle(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw FormatError("bundle directory not found: " + dir.string());
  const auto kv = parse_key_values(read_text(dir / kManifest), "manifest");
  static const char* known[] = {"format_version", "L", "T_max", "dt", "n_basis",
                                "kernel_kind", "created_by", "meta"};
  for (const auto& [key, value] : kv) {
    if (std::find(std::begin(known), std::end(known), key) == std::end(known)) {
      throw FormatError("manifest: unknown key '" + key + "'");
    }
  }
  if (require(kv, "format_version") != "1") throw FormatError("manifest: unsupported format_version");
  Dataset data;
  data.L = parse_double(require(kv, "L"), "manifest L");
  const double T_max = parse_double(require(kv, "T_max"), "manifest T_max");
  const double dt = parse_double(require(kv, "dt"), "manifest dt");
  const int n = to_int(require(kv, "n_basis"), "n_basis");
  data.kernel_kind = require(kv, "kernel_kind");
  data.created_by = require(kv, "created_by");
  const auto meta = kv.find("meta");

  TimeGrid bg;
  try {
    bg = TimeGrid::covering(T_max, dt);
  } catch (const Error& e) {
    throw FormatError(std::string("manifest: ") + e.what());
  }
  if (n < 1 || n + 1 > bg.steps()) throw FormatError("manifest: n_basis out of range");
  if (!(data.L >= 2.0 * T_max * (1.0 - 1e-12))) throw FormatError("manifest: L < 2 T_max");
  const TimeGrid dg(dt, 2 * bg.steps());

  ResponseTable& tab = data.table;
  if (meta != kv.end()) tab.meta = meta->second;

  const CsvTable kt = read_csv(dir / "kernel.csv");
  check_header(kt, {"t", "N", "N1", "N2", "N3"}, "kernel.csv");
  check_time_column(kt.columns[0], dg, "kernel.csv");
  KernelTable table{dg, kt.columns[1], kt.columns[2], kt.columns[3], kt.columns[4]};
  try {
    tab.kernel = build_kernel(KernelSpec::tabulated(std::move(table)));
  } catch (const ValidationError& e) {
    throw FormatError(std::string("kernel.csv: ") + e.what());
  }
  tab.kernel.description = data.kernel_kind;

  const CsvTable bt = read_csv(dir / "basis.csv");
  check_header(bt, indexed("t", "e", n), "basis.csv");
  check_time_column(bt.columns[0], bg, "basis.csv");
  tab.basis = ControlBasis::hats(bg, n);
  for (int j = 0; j < n; ++j) {
    const auto& col = bt.columns[static_cast<std::size_t>(j + 1)];
    const double amp = col[static_cast<std::size_t>(tab.basis.nodes[static_cast<std::size_t>(j + 1)])];
    tab.basis.amplitude[static_cast<std::size_t>(j)] = amp;
    const Sampled1D e = tab.basis.function(j);
    for (int p = 0; p < bg.nodes(); ++p) {
      if (std::abs(col[static_cast<std::size_t>(p)] - e[p]) > 1e-12 * std::max(1.0, std::abs(amp))) {
        throw FormatError("basis.csv: column e" + std::to_string(j + 1) +
                          " is not the expected hat function");
      }
    }
  }

  const CsvTable rt = read_csv(dir / "response.csv");
  check_header(rt, indexed("t", "y", n), "response.csv");
  check_time_column(rt.columns[0], dg, "response.csv");
  for (int j = 0; j < n; ++j) tab.Y.emplace_back(dg, rt.columns[static_cast<std::size_t>(j + 1)]);

  if (std::filesystem::exists(dir / "q_true.csv")) {
    const CsvTable qt = read_csv(dir / "q_true.csv");
    check_header(qt, {"x", "q"}, "q_true.csv");
    TimeGrid sg;
    try {
      sg = TimeGrid::covering(data.L, dt);
    } catch (const Error& e) {
      throw FormatError(std::string("q_true.csv: ") + e.what());
    }
    check_time_column(qt.columns[0], sg, "q_true.csv");
    data.q_true = Sampled1D(sg, qt.columns[1]);
  }
  tab.validate();
  return data;
}

}  // namespace viscoid
