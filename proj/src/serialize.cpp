#include <cstdio>
#include <cstdlib>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "sell/cascade.hpp"

namespace sell {

namespace {

constexpr const char* kMagic = "sell-cascade";

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_vector(std::ostream& out, const char* tag, std::span<const double> values) {
  out << tag;
  for (double v : values) out << ' ' << format_double(v);
  out << '\n';
}

[[noreturn]] void parse_error(std::size_t line, const std::string& what) {
  throw std::runtime_error("load_cascade: line " + std::to_string(line) + ": " + what);
}

class LineReader {
 public:
  explicit LineReader(std::istream& in) : in_(in) {}

  std::istringstream next() {
    std::string s;
    while (std::getline(in_, s)) {
      ++line_;
      if (!s.empty() && s.back() == '\r') s.pop_back();
      if (!s.empty() && s[0] != '#') return std::istringstream(s);
    }
    parse_error(line_, "unexpected end of input");
  }

  std::size_t line() const { return line_; }

  template <class T>
  T field(std::istringstream& ss, const char* name) {
    T v;
    if (!(ss >> v)) parse_error(line_, std::string("expected ") + name);
    return v;
  }

  void expect_tag(std::istringstream& ss, const char* tag) {
    std::string t;
    ss >> t;
    if (t != tag) parse_error(line_, std::string("expected '") + tag + "', got '" + t + "'");
  }

  std::vector<double> vector(const char* tag, std::size_t n) {
    auto ss = next();
    expect_tag(ss, tag);
    std::vector<double> out;
    out.reserve(n);
    std::string tok;
    while (ss >> tok) {
      char* end = nullptr;
      const double v = std::strtod(tok.c_str(), &end);
      if (end == tok.c_str() || *end != '\0') parse_error(line_, "bad number '" + tok + "'");
      out.push_back(v);
    }
    if (out.size() != n) {
      parse_error(line_, std::string(tag) + ": expected " + std::to_string(n) + " values, got " +
                             std::to_string(out.size()));
    }
    return out;
  }

 private:
  std::istream& in_;
  std::size_t line_ = 0;
};

}  // namespace

void save_cascade(const Cascade& cascade, std::ostream& out) {
  out << kMagic << ' ' << kCascadeFormatVersion << '\n';
  out << "seed " << cascade.seed() << '\n';
  out << "layers " << cascade.depth() << '\n';
  for (const auto& layer : cascade.layers()) {
    if (const auto* l = std::get_if<AcdcLayer>(&layer)) {
      out << "acdc " << l->size() << ' ' << (l->dct_mode() == DctMode::fast ? "fast" : "naive")
          << '\n';
      write_vector(out, "a", l->a());
      write_vector(out, "d", l->d());
      write_vector(out, "bias", l->bias());
    } else if (const auto* l = std::get_if<AfdfLayer>(&layer)) {
      out << "afdf " << l->size() << ' ' << (l->trainable_a() ? 1 : 0) << '\n';
      write_vector(out, "a_re", l->a_re());
      write_vector(out, "a_im", l->a_im());
      write_vector(out, "d_re", l->d_re());
      write_vector(out, "d_im", l->d_im());
    } else if (const auto* l = std::get_if<ReluLayer>(&layer)) {
      out << "relu " << l->size() << '\n';
    } else if (const auto* l = std::get_if<PermutationLayer>(&layer)) {
      out << "permutation " << l->size() << '\n' << "perm";
      for (std::size_t p : l->perm()) out << ' ' << p;
      out << '\n';
    } else if (const auto* l = std::get_if<DenseLayer>(&layer)) {
      out << "dense " << l->in_size() << ' ' << l->out_size() << '\n';
      write_vector(out, "weight", l->weight().values());
      write_vector(out, "bias", l->bias());
    }
  }
  out << "end\n";
}

Cascade load_cascade(std::istream& in) {
  LineReader r(in);
  {
    auto ss = r.next();
    r.expect_tag(ss, kMagic);
    const int version = r.field<int>(ss, "format version");
    if (version != kCascadeFormatVersion) {
      parse_error(r.line(), "unsupported format version " + std::to_string(version));
    }
  }
  Cascade cascade;
  {
    auto ss = r.next();
    r.expect_tag(ss, "seed");
    cascade.set_seed(r.field<std::uint64_t>(ss, "seed value"));
  }
  std::size_t count = 0;
  {
    auto ss = r.next();
    r.expect_tag(ss, "layers");
    count = r.field<std::size_t>(ss, "layer count");
  }
  for (std::size_t k = 0; k < count; ++k) {
    auto ss = r.next();
    std::string kind;
    ss >> kind;
    if (kind == "acdc") {
      const auto n = r.field<std::size_t>(ss, "size");
      const auto mode = r.field<std::string>(ss, "dct mode");
      if (mode != "fast" && mode != "naive") parse_error(r.line(), "bad dct mode '" + mode + "'");
      AcdcLayer l(n, mode == "fast" ? DctMode::fast : DctMode::naive);
      l.a() = r.vector("a", n);
      l.d() = r.vector("d", n);
      l.bias() = r.vector("bias", n);
      cascade.add(std::move(l));
    } else if (kind == "afdf") {
      const auto n = r.field<std::size_t>(ss, "size");
      const auto trainable = r.field<int>(ss, "trainable_a flag");
      AfdfLayer l(n);
      l.set_trainable_a(trainable != 0);
      l.a_re() = r.vector("a_re", n);
      l.a_im() = r.vector("a_im", n);
      l.d_re() = r.vector("d_re", n);
      l.d_im() = r.vector("d_im", n);
      cascade.add(std::move(l));
    } else if (kind == "relu") {
      cascade.add(ReluLayer(r.field<std::size_t>(ss, "size")));
    } else if (kind == "permutation") {
      const auto n = r.field<std::size_t>(ss, "size");
      auto ps = r.next();
      r.expect_tag(ps, "perm");
      std::vector<std::size_t> perm;
      std::size_t v;
      while (ps >> v) perm.push_back(v);
      if (perm.size() != n) parse_error(r.line(), "perm: wrong number of entries");
      cascade.add(PermutationLayer(std::move(perm)));
    } else if (kind == "dense") {
      const auto in_n = r.field<std::size_t>(ss, "input size");
      const auto out_n = r.field<std::size_t>(ss, "output size");
      DenseLayer l(in_n, out_n);
      l.weight() = Matrix(in_n, out_n, r.vector("weight", in_n * out_n));
      l.bias() = r.vector("bias", out_n);
      cascade.add(std::move(l));
    } else {
      parse_error(r.line(), "unknown layer type '" + kind + "'");
    }
  }
  auto ss = r.next();
  r.expect_tag(ss, "end");
  return cascade;
}

}  // namespace sell
