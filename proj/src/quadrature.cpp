#include "vblast/quadrature.hpp"

#include <cmath>
#include <queue>
#include <vector>

namespace vblast {
namespace {

// 15-point Kronrod / 7-point Gauss pair (QUADPACK dqk15 abscissae/weights).
constexpr double kXgk[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144838258730, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0};
constexpr double kWgk[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr double kWg[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
    double a, b;
    double value;
    double err;
    bool operator<(const Panel& o) const { return err < o.err; }
};

Panel gk15(const std::function<double(double)>& f, double a, double b) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    const double fc = f(c);
    double resg = fc * kWg[3];
    double resk = fc * kWgk[7];
    double resabs = std::abs(resk);
    double fv1[7], fv2[7];
    for (int j = 0; j < 7; ++j) {
        const double dx = h * kXgk[j];
        fv1[j] = f(c - dx);
        fv2[j] = f(c + dx);
        const double fsum = fv1[j] + fv2[j];
        if (j % 2 == 1) resg += kWg[j / 2] * fsum;
        resk += kWgk[j] * fsum;
        resabs += kWgk[j] * (std::abs(fv1[j]) + std::abs(fv2[j]));
    }
    const double mean = resk * 0.5;
    double resasc = kWgk[7] * std::abs(fc - mean);
    for (int j = 0; j < 7; ++j)
        resasc += kWgk[j] * (std::abs(fv1[j] - mean) + std::abs(fv2[j] - mean));
    resasc *= h;
    resabs *= h;

    double err = std::abs((resk - resg) * h);
    if (resasc != 0.0 && err != 0.0)
        err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
    const double eps_floor = 50.0 * 2.220446049250313e-16 * resabs;
    err = std::max(err, eps_floor);
    return {a, b, resk * h, err};
}

}  // namespace

QuadResult integrate_gk(const std::function<double(double)>& f, double a, double b,
                        double abs_tol, double rel_tol, int max_subdiv) {
    QuadResult out;
    if (a == b) {
        out.converged = true;
        return out;
    }
    std::priority_queue<Panel> heap;
    Panel p0 = gk15(f, a, b);
    double total = p0.value;
    double toterr = p0.err;
    heap.push(p0);
    int splits = 0;
    while (toterr > std::max(abs_tol, rel_tol * std::abs(total)) && splits < max_subdiv) {
        Panel worst = heap.top();
        heap.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        if (mid == worst.a || mid == worst.b) {  // interval exhausted in double
            heap.push({worst.a, worst.b, worst.value, 0.0});
            continue;
        }
        Panel left = gk15(f, worst.a, mid);
        Panel right = gk15(f, mid, worst.b);
        total += left.value + right.value - worst.value;
        toterr += left.err + right.err - worst.err;
        heap.push(left);
        heap.push(right);
        ++splits;
    }
    // Neumaier-sum the surviving panels for the returned value.
    double sum = 0.0, comp = 0.0;
    while (!heap.empty()) {
        const double v = heap.top().value;
        heap.pop();
        const double t = sum + v;
        comp += std::abs(sum) >= std::abs(v) ? (sum - t) + v : (v - t) + sum;
        sum = t;
    }
    out.value = sum + comp;
    out.error_estimate = toterr;
    out.subdivisions = splits;
    out.converged = toterr <= std::max(abs_tol, rel_tol * std::abs(out.value));
    return out;
}

}  // namespace vblast
