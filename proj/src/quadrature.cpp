#include "subtilt/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

#include "subtilt/errors.hpp"

namespace subtilt {

namespace {

// 15-point Kronrod extension of the 7-point Gauss rule (QUADPACK dqk15).
constexpr double kXgk[8] = {
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
};
constexpr double kWgk[8] = {
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
};
constexpr double kWg[4] = {
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
};

struct CellEstimate {
    double integral;
    double error;
    double resabs;  // integral of |f|
};

CellEstimate gk15(const std::function<double(double)>& f, double a, double b) {
    const double centr = 0.5 * (a + b);
    const double hlgth = 0.5 * (b - a);

    double fv[15];
    const double fc = f(centr);
    double resg = fc * kWg[3];
    double resk = fc * kWgk[7];
    double resabs = std::fabs(resk);
    fv[7] = fc;

    for (int j = 0; j < 3; ++j) {
        const int jtw = 2 * j + 1;
        const double absc = hlgth * kXgk[jtw];
        const double f1 = f(centr - absc);
        const double f2 = f(centr + absc);
        fv[jtw] = f1;
        fv[14 - jtw] = f2;
        resg += kWg[j] * (f1 + f2);
        resk += kWgk[jtw] * (f1 + f2);
        resabs += kWgk[jtw] * (std::fabs(f1) + std::fabs(f2));
    }
    for (int j = 0; j < 4; ++j) {
        const int jtwm1 = 2 * j;
        const double absc = hlgth * kXgk[jtwm1];
        const double f1 = f(centr - absc);
        const double f2 = f(centr + absc);
        fv[jtwm1] = f1;
        fv[14 - jtwm1] = f2;
        resk += kWgk[jtwm1] * (f1 + f2);
        resabs += kWgk[jtwm1] * (std::fabs(f1) + std::fabs(f2));
    }

    const double reskh = resk * 0.5;
    double resasc = kWgk[7] * std::fabs(fc - reskh);
    for (int j = 0; j < 7; ++j) {
        resasc += kWgk[j] * (std::fabs(fv[j] - reskh) + std::fabs(fv[14 - j] - reskh));
    }

    const double dhlgth = std::fabs(hlgth);
    const double integral = resk * hlgth;
    resabs *= dhlgth;
    resasc *= dhlgth;

    double err = std::fabs((resk - resg) * hlgth);
    if (resasc != 0.0 && err != 0.0) {
        err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
    }
    const double eps = std::numeric_limits<double>::epsilon();
    const double uflow = std::numeric_limits<double>::min();
    if (resabs > uflow / (50.0 * eps)) {
        err = std::max(err, 50.0 * eps * resabs);
    }
    return {integral, err, resabs};
}

struct Segment {
    double a, b;
    double integral;
    double error;
    bool operator<(const Segment& o) const { return error < o.error; }
};

QuadratureResult run_adaptive(const std::function<double(double)>& f,
                              std::priority_queue<Segment>& heap, double total,
                              double total_err, int used, const QuadratureOptions& opts) {
    const double min_width_scale = 16.0 * std::numeric_limits<double>::epsilon();
    while (true) {
        const double tol = std::max(opts.abs_tol, opts.rel_tol * std::fabs(total));
        if (total_err <= tol) break;
        if (used >= opts.max_segments) {
            throw QuadratureFailure("quadrature segment budget exhausted before reaching tolerance");
        }
        Segment worst = heap.top();
        const double mid = 0.5 * (worst.a + worst.b);
        if (!(mid > worst.a && mid < worst.b) ||
            (worst.b - worst.a) <= min_width_scale * (std::fabs(worst.a) + std::fabs(worst.b))) {
            throw QuadratureFailure("quadrature interval too small to subdivide further");
        }
        heap.pop();
        CellEstimate left = gk15(f, worst.a, mid);
        CellEstimate right = gk15(f, mid, worst.b);
        total += left.integral + right.integral - worst.integral;
        total_err += left.error + right.error - worst.error;
        heap.push({worst.a, mid, left.integral, left.error});
        heap.push({mid, worst.b, right.integral, right.error});
        ++used;
    }
    // Recompute the totals from the surviving segments to shed accumulated
    // cancellation in the incremental updates.
    double value = 0.0, err = 0.0;
    while (!heap.empty()) {
        value += heap.top().integral;
        err += heap.top().error;
        heap.pop();
    }
    return {value, err, used};
}

}  // namespace

QuadratureResult integrate(const std::function<double(double)>& f, double a, double b,
                           const QuadratureOptions& opts) {
    if (!(a < b) || !std::isfinite(a) || !std::isfinite(b)) {
        throw DomainError("quadrature interval must be finite with a < b");
    }
    std::priority_queue<Segment> heap;
    CellEstimate first = gk15(f, a, b);
    heap.push({a, b, first.integral, first.error});
    return run_adaptive(f, heap, first.integral, first.error, 1, opts);
}

QuadratureResult integrate_panel(const std::function<double(double)>& f, double a, double b) {
    if (!(a < b) || !std::isfinite(a) || !std::isfinite(b)) {
        throw DomainError("quadrature interval must be finite with a < b");
    }
    CellEstimate c = gk15(f, a, b);
    return {c.integral, c.error, 1};
}

QuadratureResult integrate_segments(const std::function<double(double)>& f,
                                    const std::vector<double>& pts,
                                    const QuadratureOptions& opts) {
    if (pts.size() < 2) {
        throw DomainError("quadrature needs at least two breakpoints");
    }
    std::priority_queue<Segment> heap;
    double total = 0.0, total_err = 0.0;
    int used = 0;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        if (!(pts[i] < pts[i + 1]) || !std::isfinite(pts[i]) || !std::isfinite(pts[i + 1])) {
            throw DomainError("quadrature breakpoints must be finite and strictly increasing");
        }
        CellEstimate c = gk15(f, pts[i], pts[i + 1]);
        heap.push({pts[i], pts[i + 1], c.integral, c.error});
        total += c.integral;
        total_err += c.error;
        ++used;
    }
    return run_adaptive(f, heap, total, total_err, used, opts);
}

}  // namespace subtilt
