#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>

namespace lunarmap {

namespace dop853 {

// Dormand–Prince 8(5,3) coefficients with the 7th-order dense-output
// extension (Hairer, Nørsett & Wanner).
inline constexpr double c2 = 0.526001519587677318785587544488e-01;
inline constexpr double c3 = 0.789002279381515978178381316732e-01;
inline constexpr double c4 = 0.118350341907227396726757197510e+00;
inline constexpr double c5 = 0.281649658092772603273242802490e+00;
inline constexpr double c6 = 0.333333333333333333333333333333e+00;
inline constexpr double c7 = 0.25e+00;
inline constexpr double c8 = 0.307692307692307692307692307692e+00;
inline constexpr double c9 = 0.651282051282051282051282051282e+00;
inline constexpr double c10 = 0.6e+00;
inline constexpr double c11 = 0.857142857142857142857142857142e+00;
inline constexpr double c14 = 0.1e+00;
inline constexpr double c15 = 0.2e+00;
inline constexpr double c16 = 0.777777777777777777777777777778e+00;

inline constexpr double a21 = 5.26001519587677318785587544488e-2;
inline constexpr double a31 = 1.97250569845378994544595329183e-2;
inline constexpr double a32 = 5.91751709536136983633785987549e-2;
inline constexpr double a41 = 2.95875854768068491816892993775e-2;
inline constexpr double a43 = 8.87627564304205475450678981324e-2;
inline constexpr double a51 = 2.41365134159266685502369798665e-1;
inline constexpr double a53 = -8.84549479328286085344864962717e-1;
inline constexpr double a54 = 9.24834003261792003115737966543e-1;
inline constexpr double a61 = 3.7037037037037037037037037037e-2;
inline constexpr double a64 = 1.70828608729473871279604482173e-1;
inline constexpr double a65 = 1.25467687566822425016691814123e-1;
inline constexpr double a71 = 3.7109375e-2;
inline constexpr double a74 = 1.70252211019544039314978060272e-1;
inline constexpr double a75 = 6.02165389804559606850219397283e-2;
inline constexpr double a76 = -1.7578125e-2;
inline constexpr double a81 = 3.70920001185047927108779319836e-2;
inline constexpr double a84 = 1.70383925712239993810214054705e-1;
inline constexpr double a85 = 1.07262030446373284651809199168e-1;
inline constexpr double a86 = -1.53194377486244017527936158236e-2;
inline constexpr double a87 = 8.27378916381402288758473766002e-3;
inline constexpr double a91 = 6.24110958716075717114429577812e-1;
inline constexpr double a94 = -3.36089262944694129406857109825e0;
inline constexpr double a95 = -8.68219346841726006818189891453e-1;
inline constexpr double a96 = 2.75920996994467083049415600797e1;
inline constexpr double a97 = 2.01540675504778934086186788979e1;
inline constexpr double a98 = -4.34898841810699588477366255144e1;
inline constexpr double a101 = 4.77662536438264365890433908527e-1;
inline constexpr double a104 = -2.48811461997166764192642586468e0;
inline constexpr double a105 = -5.90290826836842996371446475743e-1;
inline constexpr double a106 = 2.12300514481811942347288949897e1;
inline constexpr double a107 = 1.52792336328824235832596922938e1;
inline constexpr double a108 = -3.32882109689848629194453265587e1;
inline constexpr double a109 = -2.03312017085086261358222928593e-2;
inline constexpr double a111 = -9.3714243008598732571704021658e-1;
inline constexpr double a114 = 5.18637242884406370830023853209e0;
inline constexpr double a115 = 1.09143734899672957818500254654e0;
inline constexpr double a116 = -8.14978701074692612513997267357e0;
inline constexpr double a117 = -1.85200656599969598641566180701e1;
inline constexpr double a118 = 2.27394870993505042818970056734e1;
inline constexpr double a119 = 2.49360555267965238987089396762e0;
inline constexpr double a1110 = -3.0467644718982195003823669022e0;
inline constexpr double a121 = 2.27331014751653820792359768449e0;
inline constexpr double a124 = -1.05344954667372501984066689879e1;
inline constexpr double a125 = -2.00087205822486249909675718444e0;
inline constexpr double a126 = -1.79589318631187989172765950534e1;
inline constexpr double a127 = 2.79488845294199600508499808837e1;
inline constexpr double a128 = -2.85899827713502369474065508674e0;
inline constexpr double a129 = -8.87285693353062954433549289258e0;
inline constexpr double a1210 = 1.23605671757943030647266201528e1;
inline constexpr double a1211 = 6.43392746015763530355970484046e-1;

inline constexpr double a141 = 5.61675022830479523392909219681e-2;
inline constexpr double a147 = 2.53500210216624811088794765333e-1;
inline constexpr double a148 = -2.46239037470802489917441475441e-1;
inline constexpr double a149 = -1.24191423263816360469010140626e-1;
inline constexpr double a1410 = 1.5329179827876569731206322685e-1;
inline constexpr double a1411 = 8.20105229563468988491666602057e-3;
inline constexpr double a1412 = 7.56789766054569976138603589584e-3;
inline constexpr double a1413 = -8.298e-3;
inline constexpr double a151 = 3.18346481635021405060768473261e-2;
inline constexpr double a156 = 2.83009096723667755288322961402e-2;
inline constexpr double a157 = 5.35419883074385676223797384372e-2;
inline constexpr double a158 = -5.49237485713909884646569340306e-2;
inline constexpr double a1511 = -1.08347328697249322858509316994e-4;
inline constexpr double a1512 = 3.82571090835658412954920192323e-4;
inline constexpr double a1513 = -3.40465008687404560802977114492e-4;
inline constexpr double a1514 = 1.41312443674632500278074618366e-1;
inline constexpr double a161 = -4.28896301583791923408573538692e-1;
inline constexpr double a166 = -4.69762141536116384314449447206e0;
inline constexpr double a167 = 7.68342119606259904184240953878e0;
inline constexpr double a168 = 4.06898981839711007970213554331e0;
inline constexpr double a169 = 3.56727187455281109270669543021e-1;
inline constexpr double a1613 = -1.39902416515901462129418009734e-3;
inline constexpr double a1614 = 2.9475147891527723389556272149e0;
inline constexpr double a1615 = -9.15095847217987001081870187138e0;

inline constexpr double b1 = 5.42937341165687622380535766363e-2;
inline constexpr double b6 = 4.45031289275240888144113950566e0;
inline constexpr double b7 = 1.89151789931450038304281599044e0;
inline constexpr double b8 = -5.8012039600105847814672114227e0;
inline constexpr double b9 = 3.1116436695781989440891606237e-1;
inline constexpr double b10 = -1.52160949662516078556178806805e-1;
inline constexpr double b11 = 2.01365400804030348374776537501e-1;
inline constexpr double b12 = 4.47106157277725905176885569043e-2;

inline constexpr double bhh1 = 0.244094488188976377952755905512e+00;
inline constexpr double bhh2 = 0.733846688281611857341361741547e+00;
inline constexpr double bhh3 = 0.220588235294117647058823529412e-01;

inline constexpr double er1 = 0.1312004499419488073250102996e-01;
inline constexpr double er6 = -0.1225156446376204440720569753e+01;
inline constexpr double er7 = -0.4957589496572501915214079952e+00;
inline constexpr double er8 = 0.1664377182454986536961530415e+01;
inline constexpr double er9 = -0.3503288487499736816886487290e+00;
inline constexpr double er10 = 0.3341791187130174790297318841e+00;
inline constexpr double er11 = 0.8192320648511571246570742613e-01;
inline constexpr double er12 = -0.2235530786388629525884427845e-01;

inline constexpr double d41 = -0.84289382761090128651353491142e+01;
inline constexpr double d46 = 0.56671495351937776962531783590e+00;
inline constexpr double d47 = -0.30689499459498916912797304727e+01;
inline constexpr double d48 = 0.23846676565120698287728149680e+01;
inline constexpr double d49 = 0.21170345824450282767155149946e+01;
inline constexpr double d410 = -0.87139158377797299206789907490e+00;
inline constexpr double d411 = 0.22404374302607882758541771650e+01;
inline constexpr double d412 = 0.63157877876946881815570249290e+00;
inline constexpr double d413 = -0.88990336451333310820698117400e-01;
inline constexpr double d414 = 0.18148505520854727256656404962e+02;
inline constexpr double d415 = -0.91946323924783554000451984436e+01;
inline constexpr double d416 = -0.44360363875948939664310572000e+01;
inline constexpr double d51 = 0.10427508642579134603413151009e+02;
inline constexpr double d56 = 0.24228349177525818288430175319e+03;
inline constexpr double d57 = 0.16520045171727028198505394887e+03;
inline constexpr double d58 = -0.37454675472269020279518312152e+03;
inline constexpr double d59 = -0.22113666853125306036270938578e+02;
inline constexpr double d510 = 0.77334326684722638389603898808e+01;
inline constexpr double d511 = -0.30674084731089398182061213626e+02;
inline constexpr double d512 = -0.93321305264302278729567221706e+01;
inline constexpr double d513 = 0.15697238121770843886131091075e+02;
inline constexpr double d514 = -0.31139403219565177677282850411e+02;
inline constexpr double d515 = -0.93529243588444783865713862664e+01;
inline constexpr double d516 = 0.35816841486394083752465898540e+02;
inline constexpr double d61 = 0.19985053242002433820987653617e+02;
inline constexpr double d66 = -0.38703730874935176555105901742e+03;
inline constexpr double d67 = -0.18917813819516756882830838328e+03;
inline constexpr double d68 = 0.52780815920542364900561016686e+03;
inline constexpr double d69 = -0.11573902539959630126141871134e+02;
inline constexpr double d610 = 0.68812326946963000169666922661e+01;
inline constexpr double d611 = -0.10006050966910838403183860980e+01;
inline constexpr double d612 = 0.77771377980534432092869265740e+00;
inline constexpr double d613 = -0.27782057523535084065932004339e+01;
inline constexpr double d614 = -0.60196695231264120758267380846e+02;
inline constexpr double d615 = 0.84320405506677161018159903784e+02;
inline constexpr double d616 = 0.11992291136182789328035130030e+02;
inline constexpr double d71 = -0.25693933462703749003312586129e+02;
inline constexpr double d76 = -0.15418974869023643374053993627e+03;
inline constexpr double d77 = -0.23152937917604549567536039109e+03;
inline constexpr double d78 = 0.35763911791061412378285349910e+03;
inline constexpr double d79 = 0.93405324183624310003907691704e+02;
inline constexpr double d710 = -0.37458323136451633156875139351e+02;
inline constexpr double d711 = 0.10409964950896230045147246184e+03;
inline constexpr double d712 = 0.29840293426660503123344363579e+02;
inline constexpr double d713 = -0.43533456590011143754432175058e+02;
inline constexpr double d714 = 0.96324553959188282948394950600e+02;
inline constexpr double d715 = -0.39177261675615439165231486172e+02;
inline constexpr double d716 = -0.14972683625798562581422125276e+03;

}  // namespace dop853

struct IntegratorOptions {
  double rtol = 1e-13;
  double atol = 1e-13;
  double max_step = std::numeric_limits<double>::infinity();
  std::size_t max_steps = 1'000'000;
  /// Only the leading components enter the error norm; -1 means all.
  /// Variational components ride along on the steps chosen for the state.
  int error_components = -1;
  /// Step-size controller (Hairer's PI form): exponent on the previous error.
  double beta = 0.02;
  double safety = 0.9;
  double min_factor = 0.333;
  double max_factor = 6.0;
};

enum class StepStatus { accepted, step_underflow, too_many_steps };

/// Adaptive Dormand–Prince 8(5,3) stepper with 7th-order dense output.
///
/// Driven one accepted step at a time so callers can inspect each step for
/// events before continuing. Dense-output coefficients are built lazily, only
/// when `interpolate` is called for the current step (three extra stages).
template <int N, class Rhs>
class Dop853 {
 public:
  using Vector = Eigen::Matrix<double, N, 1>;

  Dop853(Rhs rhs, IntegratorOptions options) : rhs_(std::move(rhs)), options_(options) {
    error_n_ = options_.error_components < 0 ? N : std::min(N, options_.error_components);
  }

  /// Prepares integration of y' = f(t, y) from (t0, y0) towards t_end
  /// (either direction).
  void start(double t0, const Vector& y0, double t_end) {
    t_ = t0;
    t_prev_ = t0;
    t_end_ = t_end;
    y_ = y0;
    y_prev_ = y0;
    direction_ = t_end >= t0 ? 1.0 : -1.0;
    steps_ = 0;
    facold_ = 1e-4;
    last_rejected_ = false;
    dense_ready_ = false;
    rhs_(t_, y_, k1_);
    f_prev_ = k1_;
    evaluations_ = 1;
    h_ = t_end == t0 ? 0.0 : initial_step();
  }

  bool finished() const { return t_ == t_end_; }

  /// Advances by one accepted step, never past t_end.
  StepStatus step() {
    namespace c = dop853;
    constexpr double uround = 2.3e-16;
    const double expo1 = 1.0 / 8.0 - options_.beta * 0.2;
    const double facc1 = 1.0 / options_.min_factor;
    const double facc2 = 1.0 / options_.max_factor;

    for (;;) {
      if (steps_ >= options_.max_steps) return StepStatus::too_many_steps;
      if (0.1 * std::abs(h_) <= std::abs(t_) * uround) return StepStatus::step_underflow;

      bool last = false;
      if ((t_ + 1.01 * h_ - t_end_) * direction_ > 0.0) {
        h_ = t_end_ - t_;
        last = true;
      }
      ++steps_;
      const double h = h_;

      rhs_(t_ + c::c2 * h, y_ + h * (c::a21 * k1_), k2_);
      rhs_(t_ + c::c3 * h, y_ + h * (c::a31 * k1_ + c::a32 * k2_), k3_);
      rhs_(t_ + c::c4 * h, y_ + h * (c::a41 * k1_ + c::a43 * k3_), k4_);
      rhs_(t_ + c::c5 * h, y_ + h * (c::a51 * k1_ + c::a53 * k3_ + c::a54 * k4_), k5_);
      rhs_(t_ + c::c6 * h, y_ + h * (c::a61 * k1_ + c::a64 * k4_ + c::a65 * k5_), k6_);
      rhs_(t_ + c::c7 * h,
           y_ + h * (c::a71 * k1_ + c::a74 * k4_ + c::a75 * k5_ + c::a76 * k6_), k7_);
      rhs_(t_ + c::c8 * h,
           y_ + h * (c::a81 * k1_ + c::a84 * k4_ + c::a85 * k5_ + c::a86 * k6_ + c::a87 * k7_),
           k8_);
      rhs_(t_ + c::c9 * h,
           y_ + h * (c::a91 * k1_ + c::a94 * k4_ + c::a95 * k5_ + c::a96 * k6_ + c::a97 * k7_ +
                     c::a98 * k8_),
           k9_);
      rhs_(t_ + c::c10 * h,
           y_ + h * (c::a101 * k1_ + c::a104 * k4_ + c::a105 * k5_ + c::a106 * k6_ +
                     c::a107 * k7_ + c::a108 * k8_ + c::a109 * k9_),
           k10_);
      rhs_(t_ + c::c11 * h,
           y_ + h * (c::a111 * k1_ + c::a114 * k4_ + c::a115 * k5_ + c::a116 * k6_ +
                     c::a117 * k7_ + c::a118 * k8_ + c::a119 * k9_ + c::a1110 * k10_),
           k11_);
      const double t_new = last ? t_end_ : t_ + h;
      rhs_(t_new,
           y_ + h * (c::a121 * k1_ + c::a124 * k4_ + c::a125 * k5_ + c::a126 * k6_ +
                     c::a127 * k7_ + c::a128 * k8_ + c::a129 * k9_ + c::a1210 * k10_ +
                     c::a1211 * k11_),
           k12_);
      evaluations_ += 11;

      const Vector incr = c::b1 * k1_ + c::b6 * k6_ + c::b7 * k7_ + c::b8 * k8_ + c::b9 * k9_ +
                          c::b10 * k10_ + c::b11 * k11_ + c::b12 * k12_;
      const Vector y_new = y_ + h * incr;

      double err3 = 0.0;
      double err5 = 0.0;
      for (int i = 0; i < error_n_; ++i) {
        const double sk =
            options_.atol + options_.rtol * std::max(std::abs(y_[i]), std::abs(y_new[i]));
        const double e3 = incr[i] - c::bhh1 * k1_[i] - c::bhh2 * k9_[i] - c::bhh3 * k12_[i];
        const double e5 = c::er1 * k1_[i] + c::er6 * k6_[i] + c::er7 * k7_[i] +
                          c::er8 * k8_[i] + c::er9 * k9_[i] + c::er10 * k10_[i] +
                          c::er11 * k11_[i] + c::er12 * k12_[i];
        err3 += (e3 / sk) * (e3 / sk);
        err5 += (e5 / sk) * (e5 / sk);
      }
      double deno = err5 + 0.01 * err3;
      if (deno <= 0.0) deno = 1.0;
      const double err = std::abs(h) * err5 * std::sqrt(1.0 / (error_n_ * deno));

      const double fac11 = std::pow(err, expo1);
      if (err <= 1.0) {
        double fac = fac11 / std::pow(facold_, options_.beta);
        fac = std::max(facc2, std::min(facc1, fac / options_.safety));
        facold_ = std::max(err, 1e-4);

        t_prev_ = t_;
        y_prev_ = y_;
        f_prev_ = k1_;
        t_ = t_new;
        y_ = y_new;
        rhs_(t_, y_, k1_);
        ++evaluations_;
        dense_ready_ = false;

        double h_next = std::min(std::abs(h / fac), options_.max_step);
        if (last_rejected_) h_next = std::min(h_next, std::abs(h));
        h_ = direction_ * h_next;
        last_rejected_ = false;
        return StepStatus::accepted;
      }
      h_ = h / std::min(facc1, fac11 / options_.safety);
      last_rejected_ = true;
    }
  }

  double t() const { return t_; }
  double t_prev() const { return t_prev_; }
  const Vector& y() const { return y_; }
  const Vector& y_prev() const { return y_prev_; }
  const Vector& f() const { return k1_; }
  const Vector& f_prev() const { return f_prev_; }
  std::size_t steps() const { return steps_; }
  std::size_t evaluations() const { return evaluations_; }
  double direction() const { return direction_; }

  /// Continuous extension over the last accepted step [t_prev, t].
  Vector interpolate(double t) {
    if (t_ == t_prev_) return y_;
    if (!dense_ready_) build_dense();
    const double s = (t - t_prev_) / (t_ - t_prev_);
    const double s1 = 1.0 - s;
    const Vector conpar = r5_ + s * (r6_ + s1 * (r7_ + s * r8_));
    return y_prev_ + s * (r2_ + s1 * (r3_ + s * (r4_ + s1 * conpar)));
  }

 private:
  double initial_step() {
    const int iord = 8;
    double dnf = 0.0;
    double dny = 0.0;
    for (int i = 0; i < error_n_; ++i) {
      const double sk = options_.atol + options_.rtol * std::abs(y_[i]);
      dnf += (k1_[i] / sk) * (k1_[i] / sk);
      dny += (y_[i] / sk) * (y_[i] / sk);
    }
    double h = (dnf <= 1e-10 || dny <= 1e-10) ? 1e-6 : std::sqrt(dny / dnf) * 0.01;
    h = std::min(h, options_.max_step);
    h = std::min(h, std::abs(t_end_ - t_));
    Vector f1;
    rhs_(t_ + direction_ * h, y_ + direction_ * h * k1_, f1);
    ++evaluations_;
    double der2 = 0.0;
    for (int i = 0; i < error_n_; ++i) {
      const double sk = options_.atol + options_.rtol * std::abs(y_[i]);
      const double d = (f1[i] - k1_[i]) / sk;
      der2 += d * d;
    }
    der2 = std::sqrt(der2) / h;
    const double der12 = std::max(std::abs(der2), std::sqrt(dnf));
    const double h1 = der12 <= 1e-15 ? std::max(1e-6, std::abs(h) * 1e-3)
                                     : std::pow(0.01 / der12, 1.0 / iord);
    h = std::min({100.0 * std::abs(h), h1, options_.max_step});
    return direction_ * h;
  }

  void build_dense() {
    namespace c = dop853;
    const double h = t_ - t_prev_;
    const Vector& y0 = y_prev_;
    const Vector& k1 = f_prev_;
    const Vector& knew = k1_;
    const Vector ydiff = y_ - y0;
    const Vector bspl = h * k1 - ydiff;
    r2_ = ydiff;
    r3_ = bspl;
    r4_ = ydiff - h * knew - bspl;
    r5_ = c::d41 * k1 + c::d46 * k6_ + c::d47 * k7_ + c::d48 * k8_ + c::d49 * k9_ +
          c::d410 * k10_ + c::d411 * k11_ + c::d412 * k12_;
    r6_ = c::d51 * k1 + c::d56 * k6_ + c::d57 * k7_ + c::d58 * k8_ + c::d59 * k9_ +
          c::d510 * k10_ + c::d511 * k11_ + c::d512 * k12_;
    r7_ = c::d61 * k1 + c::d66 * k6_ + c::d67 * k7_ + c::d68 * k8_ + c::d69 * k9_ +
          c::d610 * k10_ + c::d611 * k11_ + c::d612 * k12_;
    r8_ = c::d71 * k1 + c::d76 * k6_ + c::d77 * k7_ + c::d78 * k8_ + c::d79 * k9_ +
          c::d710 * k10_ + c::d711 * k11_ + c::d712 * k12_;

    Vector k14;
    Vector k15;
    Vector k16;
    rhs_(t_prev_ + c::c14 * h,
         y0 + h * (c::a141 * k1 + c::a147 * k7_ + c::a148 * k8_ + c::a149 * k9_ +
                   c::a1410 * k10_ + c::a1411 * k11_ + c::a1412 * k12_ + c::a1413 * knew),
         k14);
    rhs_(t_prev_ + c::c15 * h,
         y0 + h * (c::a151 * k1 + c::a156 * k6_ + c::a157 * k7_ + c::a158 * k8_ +
                   c::a1511 * k11_ + c::a1512 * k12_ + c::a1513 * knew + c::a1514 * k14),
         k15);
    rhs_(t_prev_ + c::c16 * h,
         y0 + h * (c::a161 * k1 + c::a166 * k6_ + c::a167 * k7_ + c::a168 * k8_ +
                   c::a169 * k9_ + c::a1613 * knew + c::a1614 * k14 + c::a1615 * k15),
         k16);
    evaluations_ += 3;

    r5_ = h * (r5_ + c::d413 * knew + c::d414 * k14 + c::d415 * k15 + c::d416 * k16);
    r6_ = h * (r6_ + c::d513 * knew + c::d514 * k14 + c::d515 * k15 + c::d516 * k16);
    r7_ = h * (r7_ + c::d613 * knew + c::d614 * k14 + c::d615 * k15 + c::d616 * k16);
    r8_ = h * (r8_ + c::d713 * knew + c::d714 * k14 + c::d715 * k15 + c::d716 * k16);
    dense_ready_ = true;
  }

  Rhs rhs_;
  IntegratorOptions options_;
  int error_n_ = N;

  double t_ = 0.0;
  double t_prev_ = 0.0;
  double t_end_ = 0.0;
  double h_ = 0.0;
  double direction_ = 1.0;
  double facold_ = 1e-4;
  bool last_rejected_ = false;
  bool dense_ready_ = false;
  std::size_t steps_ = 0;
  std::size_t evaluations_ = 0;

  Vector y_, y_prev_, f_prev_;
  Vector k1_, k2_, k3_, k4_, k5_, k6_, k7_, k8_, k9_, k10_, k11_, k12_;
  Vector r2_, r3_, r4_, r5_, r6_, r7_, r8_;
};

}  // namespace lunarmap
