#include "rieszwave/serialization.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "json.hpp"
#include "rieszwave/errors.hpp"

namespace rieszwave {

namespace {

class Writer {
 public:
  explicit Writer(const std::filesystem::path& path) : out_(path, std::ios::binary | std::ios::trunc) {
    if (!out_) throw std::runtime_error("cannot open " + path.string() + " for writing");
  }
  void u64(std::uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    out_.write(reinterpret_cast<const char*>(b), 8);
  }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void values(const Eigen::ArrayXd& a) {
    if constexpr (std::endian::native == std::endian::little) {
      out_.write(reinterpret_cast<const char*>(a.data()), static_cast<std::streamsize>(a.size() * sizeof(double)));
    } else {
      for (Eigen::Index i = 0; i < a.size(); ++i) f64(a[i]);
    }
  }
  void close(const std::filesystem::path& path) {
    out_.close();
    if (!out_) throw std::runtime_error("write failed for " + path.string());
  }

 private:
  std::ofstream out_;
};

class Reader {
 public:
  explicit Reader(const std::filesystem::path& path) : in_(path, std::ios::binary), path_(path) {
    if (!in_) throw std::runtime_error("cannot open " + path.string());
  }
  std::uint64_t u64() {
    unsigned char b[8];
    if (!in_.read(reinterpret_cast<char*>(b), 8)) throw DomainError(path_.string() + ": truncated header");
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= std::uint64_t(b[i]) << (8 * i);
    return v;
  }
  double f64() { return std::bit_cast<double>(u64()); }
  void values(Eigen::ArrayXd& a) {
    if constexpr (std::endian::native == std::endian::little) {
      if (!in_.read(reinterpret_cast<char*>(a.data()), static_cast<std::streamsize>(a.size() * sizeof(double)))) {
        throw DomainError(path_.string() + ": truncated data");
      }
    } else {
      for (Eigen::Index i = 0; i < a.size(); ++i) a[i] = f64();
    }
    if (in_.peek() != std::char_traits<char>::eof()) throw DomainError(path_.string() + ": trailing bytes");
  }

 private:
  std::ifstream in_;
  std::filesystem::path path_;
};

void write_header(Writer& w, std::uint64_t magic, const GridSpec& g, int d, double beta, std::uint64_t seed) {
  w.u64(magic);
  w.u64(kFormatVersion);
  w.u64(static_cast<std::uint64_t>(g.k));
  w.u64(static_cast<std::uint64_t>(d));
  w.u64(static_cast<std::uint64_t>(g.n_space));
  w.u64(static_cast<std::uint64_t>(g.n_time));
  w.f64(g.L);
  w.f64(g.dt);
  w.f64(beta);
  w.u64(seed);
}

struct Header {
  GridSpec grid;
  int d = 1;
  double beta = 0;
  std::uint64_t seed = 0;
};

Header read_header(Reader& r, std::uint64_t magic, const std::filesystem::path& path) {
  if (r.u64() != magic) throw DomainError(path.string() + ": wrong file type");
  if (r.u64() != kFormatVersion) throw DomainError(path.string() + ": unsupported format version");
  Header h;
  h.grid.k = static_cast<int>(r.u64());
  h.d = static_cast<int>(r.u64());
  h.grid.n_space = static_cast<int>(r.u64());
  h.grid.n_time = static_cast<int>(r.u64());
  h.grid.L = r.f64();
  h.grid.dt = r.f64();
  h.beta = r.f64();
  h.seed = r.u64();
  h.grid.validate();
  if (h.d < 1 || h.d > 64) throw DomainError(path.string() + ": bad component count");
  return h;
}

std::string hex(std::uint64_t v) {
  std::ostringstream s;
  s << std::hex << std::setw(16) << std::setfill('0') << v;
  return s.str();
}

}  // namespace

void write_noise_grid(const std::filesystem::path& path, const NoiseGrid& noise) {
  Writer w(path);
  write_header(w, kNoiseMagic, noise.grid, noise.d, noise.beta, noise.master_seed);
  w.values(noise.increments);
  w.close(path);
}

NoiseGrid read_noise_grid(const std::filesystem::path& path) {
  Reader r(path);
  const Header h = read_header(r, kNoiseMagic, path);
  NoiseGrid g;
  g.grid = h.grid;
  g.d = h.d;
  g.beta = h.beta;
  g.master_seed = h.seed;
  g.increments.resize(static_cast<Eigen::Index>(h.grid.points() * h.d * h.grid.n_time));
  r.values(g.increments);
  return g;
}

void write_solution_field(const std::filesystem::path& path, const SolutionField& field) {
  Writer w(path);
  write_header(w, kFieldMagic, field.grid, field.d, field.beta, field.master_seed);
  w.u64(field.model_hash);
  w.u64(field.contained ? 1 : 0);
  w.values(field.values);
  w.close(path);
}

SolutionField read_solution_field(const std::filesystem::path& path) {
  Reader r(path);
  const Header h = read_header(r, kFieldMagic, path);
  SolutionField f;
  f.grid = h.grid;
  f.d = h.d;
  f.beta = h.beta;
  f.master_seed = h.seed;
  f.model_hash = r.u64();
  f.contained = r.u64() != 0;
  f.values.resize(static_cast<Eigen::Index>((h.grid.n_time + 1) * h.grid.points() * h.d));
  r.values(f.values);
  return f;
}

std::vector<std::string> write_ensemble(const std::filesystem::path& dir, std::span<const SolutionField> paths,
                                        std::uint64_t master_seed) {
  std::filesystem::create_directories(dir);
  std::vector<std::string> files;
  nlohmann::json entries = nlohmann::json::array();
  std::uint64_t model_hash = paths.empty() ? 0 : paths.front().model_hash;
  for (std::size_t p = 0; p < paths.size(); ++p) {
    if (paths[p].model_hash != model_hash) throw DomainError("write_ensemble: paths come from different models");
    std::ostringstream name;
    name << "path_" << std::setw(5) << std::setfill('0') << p << ".rwf";
    write_solution_field(dir / name.str(), paths[p]);
    files.push_back(name.str());
    entries.push_back({{"file", name.str()}, {"seed", paths[p].master_seed}});
  }
  const nlohmann::json manifest{
      {"master_seed", master_seed}, {"model_hash", hex(model_hash)}, {"paths", entries}};
  std::ofstream out(dir / "manifest.json");
  out << manifest.dump(2) << '\n';
  if (!out) throw std::runtime_error("cannot write ensemble manifest in " + dir.string());
  return files;
}

std::vector<SolutionField> read_ensemble(const std::filesystem::path& dir) {
  std::ifstream in(dir / "manifest.json");
  if (!in) throw std::runtime_error("no manifest.json in " + dir.string());
  const auto manifest = nlohmann::json::parse(in);
  std::vector<SolutionField> out;
  for (const auto& e : manifest.at("paths")) {
    out.push_back(read_solution_field(dir / e.at("file").get<std::string>()));
    if (hex(out.back().model_hash) != manifest.at("model_hash").get<std::string>()) {
      throw DomainError("read_ensemble: model hash mismatch in " + e.at("file").get<std::string>());
    }
  }
  return out;
}

}  // namespace rieszwave
