#include <array>
#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>

#include "mvcca/dataset.hpp"
#include "mvcca/errors.hpp"

namespace mvcca {

namespace {

constexpr std::array<char, 8> kMagic{'M', 'V', 'C', 'C', 'A', '0', '0', '1'};

std::string format17(double v) {
  char buf[40];
  const int len = std::snprintf(buf, sizeof buf, "%.17g", v);
  return std::string(buf, static_cast<std::size_t>(len));
}

template <class T>
T byteswap_if_big(T v) {
  if constexpr (std::endian::native == std::endian::big) {
    unsigned char bytes[sizeof(T)];
    std::memcpy(bytes, &v, sizeof(T));
    for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(bytes[i], bytes[sizeof(T) - 1 - i]);
    std::memcpy(&v, bytes, sizeof(T));
  }
  return v;
}

template <class T>
void put(std::ostream& out, T v) {
  v = byteswap_if_big(v);
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::istream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw IoError("binary dataset: truncated input");
  return byteswap_if_big(v);
}

}  // namespace

void write_csv(const std::vector<ViewDataset>& views, std::ostream& out) {
  out << "view,sample,coord,value\n";
  for (const auto& v : views)
    for (Eigen::Index t = 0; t < v.samples(); ++t)
      for (Eigen::Index c = 0; c < v.dim(); ++c)
        out << v.view_index << ',' << t << ',' << c << ',' << format17(v.z(t, c)) << '\n';
  if (!out) throw IoError("dataset CSV: write failed");
}

std::vector<ViewDataset> read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw IoError("dataset CSV: empty input");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "view,sample,coord,value") throw IoError("dataset CSV: unexpected header '" + line + "'");

  struct Cells {
    std::map<std::pair<long long, long long>, double> values;
    long long max_sample = -1, max_coord = -1;
  };
  std::map<long long, Cells> by_view;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::array<std::string, 4> fields;
    std::stringstream ss(line);
    for (auto& f : fields)
      if (!std::getline(ss, f, ',')) throw IoError("dataset CSV line " + std::to_string(lineno) + ": expected 4 fields");
    try {
      const long long view = std::stoll(fields[0]);
      const long long sample = std::stoll(fields[1]);
      const long long coord = std::stoll(fields[2]);
      const double value = std::stod(fields[3]);
      if (view < 0 || sample < 0 || coord < 0) throw IoError("negative index");
      auto& cells = by_view[view];
      if (!cells.values.emplace(std::make_pair(sample, coord), value).second)
        throw IoError("duplicate cell");
      cells.max_sample = std::max(cells.max_sample, sample);
      cells.max_coord = std::max(cells.max_coord, coord);
    } catch (const IoError& e) {
      throw IoError("dataset CSV line " + std::to_string(lineno) + ": " + e.what());
    } catch (const std::exception&) {
      throw IoError("dataset CSV line " + std::to_string(lineno) + ": malformed number");
    }
  }
  std::vector<ViewDataset> out;
  for (const auto& [view, cells] : by_view) {
    const auto n = static_cast<Eigen::Index>(cells.max_sample + 1);
    const auto d = static_cast<Eigen::Index>(cells.max_coord + 1);
    if (static_cast<Eigen::Index>(cells.values.size()) != n * d)
      throw IoError("dataset CSV: view " + std::to_string(view) + " is missing cells");
    ViewDataset ds{Eigen::MatrixXd(n, d), static_cast<std::size_t>(view)};
    for (const auto& [key, value] : cells.values) ds.z(key.first, key.second) = value;
    out.push_back(std::move(ds));
  }
  return out;
}

void write_binary(const ViewDataset& view, std::ostream& out) {
  out.write(kMagic.data(), kMagic.size());
  put<std::uint64_t>(out, static_cast<std::uint64_t>(view.samples()));
  put<std::uint64_t>(out, static_cast<std::uint64_t>(view.dim()));
  put<std::uint64_t>(out, static_cast<std::uint64_t>(view.view_index));
  for (Eigen::Index c = 0; c < view.dim(); ++c)
    for (Eigen::Index t = 0; t < view.samples(); ++t) put<double>(out, view.z(t, c));
  if (!out) throw IoError("binary dataset: write failed");
}

ViewDataset read_binary(std::istream& in) {
  std::array<char, 8> magic{};
  in.read(magic.data(), magic.size());
  if (!in || magic != kMagic) throw IoError("binary dataset: bad magic");
  const auto n = get<std::uint64_t>(in);
  const auto d = get<std::uint64_t>(in);
  const auto view = get<std::uint64_t>(in);
  if (n > (1ULL << 40) || d > (1ULL << 20)) throw IoError("binary dataset: implausible dimensions");
  ViewDataset ds{Eigen::MatrixXd(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d)),
                 static_cast<std::size_t>(view)};
  for (Eigen::Index c = 0; c < ds.dim(); ++c)
    for (Eigen::Index t = 0; t < ds.samples(); ++t) ds.z(t, c) = get<double>(in);
  return ds;
}

}  // namespace mvcca
