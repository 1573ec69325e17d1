#include "neuralshell/ndf.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>
#include <stdexcept>

#include "neuralshell/rng.hpp"

namespace neuralshell {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}

std::vector<LayerShape> layer_shapes(const SirenConfig& c) {
  std::vector<LayerShape> shapes;
  std::int32_t off = 0;
  std::int32_t nin = c.in_width;
  for (int l = 0; l <= c.hidden_layers; ++l) {
    const std::int32_t nout = (l == c.hidden_layers) ? c.out_width : c.hidden_width;
    LayerShape s;
    s.nin = nin;
    s.nout = nout;
    s.w_off = off;
    s.b_off = off + nin * nout;
    off = s.b_off + nout;
    shapes.push_back(s);
    nin = nout;
  }
  return shapes;
}

std::size_t parameter_count(const SirenConfig& c) {
  std::size_t n = 0;
  for (const auto& s : layer_shapes(c)) n += static_cast<std::size_t>(s.nin) * s.nout + s.nout;
  return n;
}

NdfWeights init_siren(const SirenConfig& c) {
  NdfWeights w;
  w.config = c;
  w.theta.resize(parameter_count(c));
  SplitMix64 rng(c.seed);
  const auto shapes = layer_shapes(c);
  for (std::size_t l = 0; l < shapes.size(); ++l) {
    const auto& s = shapes[l];
    double bound;
    if (c.activation == Activation::Sine)
      bound = (l == 0) ? 1.0 / s.nin : std::sqrt(6.0 / s.nin) / c.omega0;
    else
      bound = std::sqrt(6.0 / s.nin);
    for (std::int32_t k = 0; k < s.nin * s.nout; ++k)
      w.theta[s.w_off + k] = rng.uniform(-bound, bound);
    for (std::int32_t k = 0; k < s.nout; ++k) w.theta[s.b_off + k] = rng.uniform(-bound, bound);
  }
  return w;
}

// ---------------------------------------------------------------------------
// Embedding

std::vector<DJet> embed_inputs(const EmbedSpec& e, double xi1, double xi2, double t,
                               std::span<const double, 4> mat) {
  std::vector<DJet> in;
  in.reserve(static_cast<std::size_t>(e.width()));
  const double xi[2] = {xi1, xi2};
  for (int ax = 0; ax < 2; ++ax) {
    const auto& a = e.axis[ax];
    if (a.periodic) {
      // Angular embedding: theta = 2 pi (xi - lo) / period.
      const double k = kTwoPi / (a.hi - a.lo);
      DJet th;
      th.v = (xi[ax] - a.lo) * k;
      th.d1[ax] = k;
      in.push_back(cos(th));
      in.push_back(sin(th));
    } else {
      DJet j;
      j.v = (xi[ax] - a.lo) / (a.hi - a.lo);
      j.d1[ax] = 1.0 / (a.hi - a.lo);
      in.push_back(j);
    }
  }
  if (e.dynamic) {
    DJet j;
    j.v = t / e.duration;
    j.d1[2] = 1.0 / e.duration;
    in.push_back(j);
  }
  for (int m = 0; m < e.material_dims; ++m) {
    const double range = e.mat_hi[m] - e.mat_lo[m];
    const double v = range == 0.0 ? 0.5 : (mat[m] - e.mat_lo[m]) / range;
    in.push_back(DJet::constant(v));
  }
  return in;
}

// ---------------------------------------------------------------------------
// Constraints

DJet factor_jet(const ConstraintFactor& f, const SurfaceSpec& s, double xi1, double xi2) {
  const DJet x1 = DJet::input(xi1, 0);
  const DJet x2 = DJet::input(xi2, 1);
  switch (f.kind) {
    case ConstraintFactor::Kind::PointGaussian: {
      const DJet d2 = (x1 + -f.c1) * (x1 + -f.c1) + (x2 + -f.c2) * (x2 + -f.c2);
      return -exp(d2 * (-1.0 / f.sigma)) + 1.0;
    }
    case ConstraintFactor::Kind::EdgeGaussian: {
      const DJet& x = (f.axis == 0) ? x1 : x2;
      const DJet d2 = (x + -f.at) * (x + -f.at);
      return -exp(d2 * (-1.0 / f.sigma)) + 1.0;
    }
    case ConstraintFactor::Kind::PolyEdges: {
      DJet b = DJet::constant(1.0);
      const DJet x[2] = {x1, x2};
      for (int ax = 0; ax < 2; ++ax)
        if (f.poly_axes[ax]) b = b * ((x[ax] + -s.lo[ax]) * (-x[ax] + s.hi[ax]));
      return b;
    }
  }
  return DJet::constant(1.0);
}

namespace {

// Applies the surface's rigid pose rotation to a vector of jets.
std::array<DJet, 3> rotate_jets(const Quat& q, const std::array<DJet, 3>& b) {
  if (q.w == 1.0 && q.x == 0.0 && q.y == 0.0 && q.z == 0.0) return b;
  std::array<Vec3, 3> col;
  col[0] = q.rotate(Vec3{1, 0, 0});
  col[1] = q.rotate(Vec3{0, 1, 0});
  col[2] = q.rotate(Vec3{0, 0, 1});
  std::array<DJet, 3> r;
  for (int i = 0; i < 3; ++i) r[i] = b[0] * col[0][i] + b[1] * col[1][i] + b[2] * col[2][i];
  return r;
}

}  // namespace

std::array<DJet, 3> prescribed_motion(const PrescribedMotion& m, const SurfaceSpec& s,
                                      double xi1, double t) {
  std::array<DJet, 3> b;
  const DJet tj = DJet::input(t, 2);
  switch (m.kind) {
    case PrescribedMotion::Kind::TranslationRamp:
      for (int i = 0; i < 3; ++i) b[i] = tj * m.velocity[i];
      break;
    case PrescribedMotion::Kind::RimRotation: {
      // Rim points (R cos xi1, ., R sin xi1) rotated about the y axis by
      // angle rate*t:  b = R (cos(xi1 + rate t) - cos xi1, 0, sin(xi1 + rate t) - sin xi1).
      DJet th = DJet::input(xi1, 0);
      DJet arg = th;
      arg.v += m.rate * t;
      arg.d1[2] = m.rate;
      b[0] = (cos(arg) - cos(th)) * m.radius;
      b[1] = DJet::constant(0.0);
      b[2] = (sin(arg) - sin(th)) * m.radius;
      break;
    }
  }
  return rotate_jets(s.pose_rotation, b);
}

DisplacementJet apply_constraints(Tape& t, const ConstraintSpec& c, const SurfaceSpec& s,
                                  const std::array<Jet, 3>& raw, double xi1, double xi2,
                                  double tm) {
  // Closed-form pieces are plain jets: only the network factor carries
  // parameter dependence, so the composition costs a handful of lincombs.
  std::vector<DJet> B(c.factors.size());
  for (std::size_t j = 0; j < c.factors.size(); ++j)
    B[j] = factor_jet(c.factors[j], s, xi1, xi2);

  DJet gate0 = DJet::constant(1.0);
  if (c.initial_state) {
    const DJet tj = DJet::input(tm, 2);
    gate0 = tj * tj;  // I(t) = t^2: zero value and zero velocity at t = 0
  }

  std::array<DJet, 3> offset{DJet::constant(0.0), DJet::constant(0.0), DJet::constant(0.0)};
  for (const auto& m : c.motions) {
    const std::array<DJet, 3> b = prescribed_motion(m, s, xi1, tm);
    const DJet gate = (-B[static_cast<std::size_t>(m.factor)] + 1.0) * m.sign;
    for (int i = 0; i < 3; ++i) offset[i] = offset[i] + gate * b[i];
  }

  DisplacementJet out;
  for (int comp = 0; comp < 3; ++comp) {
    DJet gate = gate0;
    for (std::size_t j = 0; j < c.factors.size(); ++j)
      if (c.factors[j].mask[comp]) gate = gate * B[j];
    Jet u = jet_mul_const(t, raw[comp], gate);
    out.u[comp] = jet_add_const(t, u, offset[comp]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Evaluation

PackedNet register_net(Tape& t, const NdfWeights& w) {
  PackedNet net;
  net.config = w.config;
  net.base = t.add_parameters(w.theta);
  for (const auto& s : layer_shapes(w.config))
    net.layers.push_back({net.base + s.w_off, net.base + s.b_off, s.nin, s.nout});
  return net;
}

std::array<Jet, 3> eval_raw(Tape& t, const PackedNet& net, const EmbedSpec& e, double xi1,
                            double xi2, double tm, std::span<const double, 4> mat) {
  const std::vector<DJet> emb = embed_inputs(e, xi1, xi2, tm, mat);
  std::vector<Jet> in(emb.size());
  for (std::size_t i = 0; i < emb.size(); ++i) in[i] = Jet::constant(t, emb[i]);

  JetBundle z = affine_from_jets(t, net.layers[0], in);
  for (std::size_t l = 1; l < net.layers.size(); ++l) {
    const JetBundle h = (net.config.activation == Activation::Sine)
                            ? sine_bundle(t, z, net.config.omega0)
                            : gelu_bundle(t, z);
    z = affine_from_bundle(t, net.layers[l], h);
  }
  const std::vector<Jet> out = bundle_to_jets(t, z);
  return {out[0], out[1], out[2]};
}

DisplacementJet eval_ndf(Tape& t, const PackedNet& net, const EmbedSpec& e,
                         const ConstraintSpec& c, const SurfaceSpec& s, double xi1, double xi2,
                         double tm, std::span<const double, 4> mat) {
  xi1 = s.wrap(0, xi1);
  xi2 = s.wrap(1, xi2);
  const std::array<Jet, 3> raw = eval_raw(t, net, e, xi1, xi2, tm, mat);
  return apply_constraints(t, c, s, raw, xi1, xi2, tm);
}

namespace {

double activate_value(Activation act, double omega0, double z) {
  if (act == Activation::Sine) return std::sin(omega0 * z);
  const double u = 0.7978845608028654 * (z + 0.044715 * z * z * z);
  return 0.5 * z * (1.0 + std::tanh(u));
}

}  // namespace

Vec3 eval_values(const NdfWeights& w, const EmbedSpec& e, const ConstraintSpec& c,
                 const SurfaceSpec& s, double xi1, double xi2, double tm,
                 std::span<const double, 4> mat) {
  xi1 = s.wrap(0, xi1);
  xi2 = s.wrap(1, xi2);
  const std::vector<DJet> emb = embed_inputs(e, xi1, xi2, tm, mat);
  std::vector<double> x(emb.size()), y;
  for (std::size_t i = 0; i < emb.size(); ++i) x[i] = emb[i].v;

  const auto shapes = layer_shapes(w.config);
  for (std::size_t l = 0; l < shapes.size(); ++l) {
    const auto& sh = shapes[l];
    y.assign(static_cast<std::size_t>(sh.nout), 0.0);
    for (std::int32_t o = 0; o < sh.nout; ++o) {
      double z = 0.0;
      const double* row = w.theta.data() + sh.w_off + o * sh.nin;
      for (std::int32_t i = 0; i < sh.nin; ++i) z += row[i] * x[i];
      z += w.theta[sh.b_off + o];
      y[o] = (l + 1 < shapes.size()) ? activate_value(w.config.activation, w.config.omega0, z) : z;
    }
    x = y;
  }

  // Constraint composition on values only.
  double gate0 = 1.0;
  if (c.initial_state) gate0 = tm * tm;
  std::vector<double> B(c.factors.size());
  for (std::size_t j = 0; j < c.factors.size(); ++j)
    B[j] = factor_jet(c.factors[j], s, xi1, xi2).v;
  Vec3 out{};
  for (int comp = 0; comp < 3; ++comp) {
    double gate = gate0;
    for (std::size_t j = 0; j < c.factors.size(); ++j)
      if (c.factors[j].mask[comp]) gate *= B[j];
    out[comp] = x[static_cast<std::size_t>(comp)] * gate;
  }
  for (const auto& m : c.motions) {
    const std::array<DJet, 3> b = prescribed_motion(m, s, xi1, tm);
    const double gate = (1.0 - B[static_cast<std::size_t>(m.factor)]) * m.sign;
    for (int i = 0; i < 3; ++i) out[i] += gate * b[i].v;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Checkpoints

namespace {

void put_u32(std::string& o, std::uint32_t v) {
  for (int k = 0; k < 4; ++k) o.push_back(static_cast<char>((v >> (8 * k)) & 0xff));
}
void put_u64(std::string& o, std::uint64_t v) {
  for (int k = 0; k < 8; ++k) o.push_back(static_cast<char>((v >> (8 * k)) & 0xff));
}
void put_f64(std::string& o, double v) { put_u64(o, std::bit_cast<std::uint64_t>(v)); }
void put_f32(std::string& o, float v) { put_u32(o, std::bit_cast<std::uint32_t>(v)); }

struct Reader {
  const unsigned char* p;
  std::size_t n, at = 0;

  void need(std::size_t k) const {
    if (at + k > n) throw std::runtime_error("checkpoint truncated");
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int k = 0; k < 4; ++k) v |= static_cast<std::uint32_t>(p[at + k]) << (8 * k);
    at += 4;
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int k = 0; k < 8; ++k) v |= static_cast<std::uint64_t>(p[at + k]) << (8 * k);
    at += 8;
    return v;
  }
  double f64() { return std::bit_cast<double>(u64()); }
  float f32() { return std::bit_cast<float>(u32()); }
};

// FNV-1a over little-endian encodings of the setup fields.
struct Digest {
  std::uint64_t h = 1469598103934665603ull;
  void bytes(const void* data, std::size_t n) {
    const auto* b = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) h = (h ^ b[i]) * 1099511628211ull;
  }
  void u64(std::uint64_t v) {
    unsigned char b[8];
    for (int k = 0; k < 8; ++k) b[k] = static_cast<unsigned char>((v >> (8 * k)) & 0xff);
    bytes(b, 8);
  }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void i(int v) { u64(static_cast<std::uint64_t>(static_cast<std::int64_t>(v))); }
};

}  // namespace

std::uint64_t setup_digest(const SurfaceSpec& s, const EmbedSpec& e, const ConstraintSpec& c) {
  Digest d;
  d.i(static_cast<int>(s.kind));
  d.f64(s.radius);
  d.f64(s.radius_top);
  d.f64(s.radius_bottom);
  d.f64(s.angle_offset);
  for (int k = 0; k < 2; ++k) {
    d.f64(s.lo[k]);
    d.f64(s.hi[k]);
    d.i(s.periodic[k] ? 1 : 0);
  }
  for (int k = 0; k < 2; ++k) {
    d.i(e.axis[k].periodic ? 1 : 0);
    d.f64(e.axis[k].lo);
    d.f64(e.axis[k].hi);
  }
  d.i(e.dynamic ? 1 : 0);
  d.f64(e.duration);
  d.i(e.material_dims);
  for (int k = 0; k < 4; ++k) {
    d.f64(e.mat_lo[k]);
    d.f64(e.mat_hi[k]);
  }
  d.i(c.initial_state ? 1 : 0);
  d.i(static_cast<int>(c.factors.size()));
  for (const auto& f : c.factors) {
    d.i(static_cast<int>(f.kind));
    d.f64(f.c1);
    d.f64(f.c2);
    d.i(f.axis);
    d.f64(f.at);
    d.i(f.poly_axes[0] ? 1 : 0);
    d.i(f.poly_axes[1] ? 1 : 0);
    d.f64(f.sigma);
    for (int k = 0; k < 3; ++k) d.i(f.mask[k] ? 1 : 0);
  }
  d.i(static_cast<int>(c.motions.size()));
  for (const auto& m : c.motions) {
    d.i(static_cast<int>(m.kind));
    d.i(m.factor);
    d.f64(m.sign);
    for (int k = 0; k < 3; ++k) d.f64(m.velocity[k]);
    d.f64(m.radius);
    d.f64(m.rate);
  }
  return d.h;
}

void save_checkpoint(const std::string& path, const NdfWeights& w, const CheckpointMeta& meta) {
  std::string out;
  out += "NDF1";
  put_u32(out, w.config.activation == Activation::Sine ? 0u : 1u);
  put_u32(out, static_cast<std::uint32_t>(w.config.hidden_layers));
  put_u32(out, static_cast<std::uint32_t>(w.config.hidden_width));
  put_u32(out, static_cast<std::uint32_t>(w.config.in_width));
  put_u32(out, static_cast<std::uint32_t>(w.config.out_width));
  put_f64(out, w.config.omega0);
  put_u64(out, meta.seed);
  put_f64(out, meta.lo1);
  put_f64(out, meta.hi1);
  put_f64(out, meta.lo2);
  put_f64(out, meta.hi2);
  put_f64(out, meta.duration);
  put_u64(out, meta.setup_digest);
  for (const auto& s : layer_shapes(w.config)) {
    for (std::int32_t k = 0; k < s.nin * s.nout; ++k)
      put_f32(out, static_cast<float>(w.theta[s.w_off + k]));
    for (std::int32_t k = 0; k < s.nout; ++k)
      put_f32(out, static_cast<float>(w.theta[s.b_off + k]));
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open checkpoint for writing: " + path);
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) throw std::runtime_error("checkpoint write failed: " + path);
}

NdfWeights load_checkpoint(const std::string& path, CheckpointMeta* meta) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open checkpoint: " + path);
  std::string buf((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  Reader r{reinterpret_cast<const unsigned char*>(buf.data()), buf.size()};
  r.need(4);
  if (std::memcmp(buf.data(), "NDF1", 4) != 0)
    throw std::runtime_error("not a checkpoint (bad magic): " + path);
  r.at = 4;

  NdfWeights w;
  w.config.activation = r.u32() == 0 ? Activation::Sine : Activation::Gelu;
  w.config.hidden_layers = static_cast<int>(r.u32());
  w.config.hidden_width = static_cast<int>(r.u32());
  w.config.in_width = static_cast<int>(r.u32());
  w.config.out_width = static_cast<int>(r.u32());
  w.config.omega0 = r.f64();
  CheckpointMeta m;
  m.seed = r.u64();
  w.config.seed = m.seed;
  m.lo1 = r.f64();
  m.hi1 = r.f64();
  m.lo2 = r.f64();
  m.hi2 = r.f64();
  m.duration = r.f64();
  m.setup_digest = r.u64();

  if (w.config.hidden_layers < 0 || w.config.hidden_layers > 64 || w.config.hidden_width <= 0 ||
      w.config.in_width <= 0 || w.config.out_width <= 0)
    throw std::runtime_error("checkpoint header is implausible: " + path);
  w.theta.resize(parameter_count(w.config));
  for (const auto& s : layer_shapes(w.config)) {
    for (std::int32_t k = 0; k < s.nin * s.nout; ++k) w.theta[s.w_off + k] = r.f32();
    for (std::int32_t k = 0; k < s.nout; ++k) w.theta[s.b_off + k] = r.f32();
  }
  if (r.at != r.n) throw std::runtime_error("checkpoint has trailing bytes: " + path);
  if (meta) *meta = m;
  return w;
}

}  // namespace neuralshell
