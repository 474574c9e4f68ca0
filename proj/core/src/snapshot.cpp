#include "semopt/snapshot.hpp"

#include <array>
#include <bit>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "semopt/error.hpp"

namespace semopt {

namespace {

constexpr const char* kMagic = "semopt-field";
constexpr int kFormatVersion = 1;

std::string format_real(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void put_le64(std::ostream& out, double v) {
  auto bits = std::bit_cast<std::uint64_t>(v);
  std::array<char, 8> bytes{};
  for (int i = 0; i < 8; ++i) {
    bytes[i] = static_cast<char>(bits & 0xffu);
    bits >>= 8;
  }
  out.write(bytes.data(), 8);
}

double get_le64(std::istream& in) {
  std::array<unsigned char, 8> bytes{};
  in.read(reinterpret_cast<char*>(bytes.data()), 8);
  if (!in) fail(ErrorKind::Io, "snapshot payload is truncated");
  std::uint64_t bits = 0;
  for (int i = 7; i >= 0; --i) bits = (bits << 8) | bytes[i];
  return std::bit_cast<double>(bits);
}

std::string next_line(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) fail(ErrorKind::Io, "snapshot header is truncated");
  return line;
}

void expect(std::istringstream& ss, const std::string& keyword) {
  std::string word;
  ss >> word;
  if (word != keyword) fail(ErrorKind::Io, "snapshot header: expected '" + keyword + "', got '" + word + "'");
}

}  // namespace

void write_snapshot(std::ostream& out, const Grid& grid, const Vector& values) {
  require(values.size() == grid.nglobal(), "snapshot values do not conform to the grid");
  out << kMagic << ' ' << kFormatVersion << '\n';
  out << "dim " << grid.dim() << '\n';
  for (int a = 0; a < grid.dim(); ++a) {
    const Axis& ax = grid.axis(a);
    out << "axis " << a << " elements " << ax.elements << " degree " << grid.degree() << " extent "
        << format_real(ax.x_a) << ' ' << format_real(ax.x_b) << " bc " << to_string(ax.bc) << '\n';
  }
  out << "ncomp " << grid.ncomp() << '\n';
  out << "count " << values.size() << '\n';
  out << "end\n";
  for (Index i = 0; i < values.size(); ++i) put_le64(out, values[i]);
  if (!out) fail(ErrorKind::Io, "failed writing snapshot");
}

void write_snapshot(const std::string& path, const Grid& grid, const Vector& values) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::Io, "cannot open '" + path + "' for writing");
  write_snapshot(out, grid, values);
}

Snapshot read_snapshot(std::istream& in) {
  Snapshot snap;
  {
    std::istringstream ss(next_line(in));
    expect(ss, kMagic);
    int version = 0;
    ss >> version;
    if (version != kFormatVersion) fail(ErrorKind::Io, "unsupported snapshot version");
  }
  int dim = 0;
  {
    std::istringstream ss(next_line(in));
    expect(ss, "dim");
    ss >> dim;
    if (dim != 1 && dim != 3) fail(ErrorKind::Io, "snapshot dim must be 1 or 3");
  }
  for (int a = 0; a < dim; ++a) {
    std::istringstream ss(next_line(in));
    int index = -1;
    Axis ax;
    int degree = 0;
    std::string bc;
    expect(ss, "axis");
    ss >> index;
    expect(ss, "elements");
    ss >> ax.elements;
    expect(ss, "degree");
    ss >> degree;
    expect(ss, "extent");
    ss >> ax.x_a >> ax.x_b;
    expect(ss, "bc");
    ss >> bc;
    if (!ss || index != a) fail(ErrorKind::Io, "malformed axis line in snapshot header");
    if (bc == "periodic") {
      ax.bc = Boundary::Periodic;
    } else if (bc == "dirichlet0") {
      ax.bc = Boundary::Dirichlet0;
    } else {
      fail(ErrorKind::Io, "unknown boundary kind '" + bc + "'");
    }
    snap.grid.degree = degree;
    snap.grid.axes.push_back(ax);
  }
  Index count = 0;
  {
    std::istringstream ss(next_line(in));
    expect(ss, "ncomp");
    ss >> snap.ncomp;
  }
  {
    std::istringstream ss(next_line(in));
    expect(ss, "count");
    ss >> count;
    if (!ss || count < 0) fail(ErrorKind::Io, "malformed count in snapshot header");
  }
  if (next_line(in) != "end") fail(ErrorKind::Io, "snapshot header missing 'end'");
  snap.values.resize(count);
  for (Index i = 0; i < count; ++i) snap.values[i] = get_le64(in);
  return snap;
}

Snapshot read_snapshot(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Io, "cannot open '" + path + "'");
  return read_snapshot(in);
}

}  // namespace semopt
