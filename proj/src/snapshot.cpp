#include "muskat/snapshot.hpp"

#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace muskat {

namespace {

constexpr const char* kMagic = "MUSKAT3D v1";

std::string format_double(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void put_le(std::string& out, double x) {
  std::uint64_t bits = std::bit_cast<std::uint64_t>(x);
  for (int b = 0; b < 8; ++b) out.push_back(static_cast<char>((bits >> (8 * b)) & 0xff));
}

double get_le(const unsigned char* p) {
  std::uint64_t bits = 0;
  for (int b = 0; b < 8; ++b) bits |= static_cast<std::uint64_t>(p[b]) << (8 * b);
  return std::bit_cast<double>(bits);
}

}  // namespace

std::string encode_snapshot(const SurfaceState& s, double t) {
  std::string out = std::string(kMagic) + " n=" + std::to_string(s.grid.n()) +
                    " L=" + format_double(s.grid.L()) + " t=" + format_double(t) + "\n";
  out.reserve(out.size() + s.grid.size() * 24);
  for (std::size_t i = 0; i < s.grid.size(); ++i)
    for (int c = 0; c < 3; ++c) put_le(out, s.U[c][i]);
  return out;
}

Snapshot decode_snapshot(const std::string& bytes) {
  const std::size_t eol = bytes.find('\n');
  if (eol == std::string::npos || eol > 256) throw FormatError("snapshot: missing header line", 0);
  const std::string header = bytes.substr(0, eol);
  if (header.rfind(kMagic, 0) != 0) throw FormatError("snapshot: bad magic", 0);

  std::istringstream in(header.substr(std::strlen(kMagic)));
  std::string tok;
  long n = -1;
  double L = 0, t = 0;
  bool have_n = false, have_L = false, have_t = false;
  while (in >> tok) {
    const std::size_t off = header.find(tok);
    try {
      std::size_t used = 0;
      if (tok.rfind("n=", 0) == 0) {
        n = std::stol(tok.substr(2), &used);
        have_n = used == tok.size() - 2;
      } else if (tok.rfind("L=", 0) == 0) {
        L = std::stod(tok.substr(2), &used);
        have_L = used == tok.size() - 2;
      } else if (tok.rfind("t=", 0) == 0) {
        t = std::stod(tok.substr(2), &used);
        have_t = used == tok.size() - 2;
      } else {
        throw FormatError("snapshot: unexpected header token '" + tok + "'", off);
      }
    } catch (const std::logic_error&) {
      throw FormatError("snapshot: malformed header token '" + tok + "'", off);
    }
  }
  if (!have_n || !have_L || !have_t) throw FormatError("snapshot: incomplete header", 0);
  if (n < 8 || n > 8192 || n % 2 != 0) throw FormatError("snapshot: invalid n", 0);

  ParamGrid g;
  try {
    g = ParamGrid(static_cast<int>(n), L);
  } catch (const InvalidInput& e) {
    throw FormatError(std::string("snapshot: ") + e.what(), 0);
  }
  const std::size_t body = eol + 1;
  const std::size_t need = g.size() * 24;
  if (bytes.size() < body + need)
    throw FormatError("snapshot: truncated payload, expected " + std::to_string(need) +
                          " bytes after header, found " + std::to_string(bytes.size() - body),
                      bytes.size());
  if (bytes.size() > body + need) throw FormatError("snapshot: trailing bytes", body + need);

  VecField3 U(g);
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data()) + body;
  for (std::size_t i = 0; i < g.size(); ++i)
    for (int c = 0; c < 3; ++c) {
      const double x = get_le(p);
      if (!std::isfinite(x))
        throw FormatError("snapshot: non-finite value",
                          body + (i * 3 + static_cast<std::size_t>(c)) * 8);
      U[c][i] = x;
      p += 8;
    }
  return {SurfaceState(g, std::move(U)), t};
}

void save_snapshot(const std::string& path, const SurfaceState& s, double t) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("io", "cannot open snapshot for writing: " + path);
  const std::string bytes = encode_snapshot(s, t);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("io", "failed writing snapshot: " + path);
}

Snapshot load_snapshot(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("io", "cannot open snapshot: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return decode_snapshot(ss.str());
}

}  // namespace muskat
