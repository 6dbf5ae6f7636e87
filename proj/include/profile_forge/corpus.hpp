#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <string_view>
#include <vector>

#include "geometry.hpp"
#include "profile.hpp"

namespace pforge {

enum class ShapeFamily {
    Rectangle,
    FilletedPlate,
    UBracket,
    IBeam,
    HolePlate,
    Stadium,
    Washer,
    ArchedPlate,
    ChamferedPlate,
    Trapezoid,
};

inline constexpr std::array<ShapeFamily, 10> kAllShapeFamilies = {
    ShapeFamily::Rectangle, ShapeFamily::FilletedPlate, ShapeFamily::UBracket,
    ShapeFamily::IBeam,     ShapeFamily::HolePlate,     ShapeFamily::Stadium,
    ShapeFamily::Washer,    ShapeFamily::ArchedPlate,   ShapeFamily::ChamferedPlate, ShapeFamily::Trapezoid,
};

inline std::string_view family_name(ShapeFamily f)
{
    switch (f) {
    case ShapeFamily::Rectangle: return "rectangle";
    case ShapeFamily::FilletedPlate: return "filleted_plate";
    case ShapeFamily::UBracket: return "u_bracket";
    case ShapeFamily::IBeam: return "i_beam";
    case ShapeFamily::HolePlate: return "hole_plate";
    case ShapeFamily::Stadium: return "stadium";
    case ShapeFamily::Washer: return "washer";
    case ShapeFamily::ArchedPlate: return "arched_plate";
    case ShapeFamily::ChamferedPlate: return "chamfered_plate";
    case ShapeFamily::Trapezoid: return "trapezoid";
    }
    return "?";
}

// Closed chain through `pts` (ccw), with a tangent arc of radii[i] at
// corner i where radii[i] > 0. Concave corners get clockwise arcs.
inline Loop rounded_polygon(const std::vector<Point2>& pts, const std::vector<double>& radii)
{
    const std::size_t n = pts.size();
    std::vector<Point2> in(n), out(n);
    std::vector<std::optional<ArcSegment>> arcs(n);
    for (std::size_t i = 0; i < n; ++i) {
        const Point2 v = pts[i];
        in[i] = out[i] = v;
        const double r = i < radii.size() ? radii[i] : 0.0;
        if (r <= 0.0) continue;
        const Point2 a = pts[(i + n - 1) % n], b = pts[(i + 1) % n];
        const Point2 u1 = (1.0 / distance(a, v)) * (v - a);
        const Point2 u2 = (1.0 / distance(v, b)) * (b - v);
        const double turn = std::atan2(cross(u1, u2), dot(u1, u2));
        const double t = r * std::tan(std::abs(turn) / 2.0);
        in[i] = v - t * u1;
        out[i] = v + t * u2;
        const Point2 c = in[i] + (turn > 0 ? r : -r) * perp(u1);
        const Point2 m = c + (r / distance(v, c)) * (v - c);
        arcs[i] = ArcSegment{in[i], m, out[i]};
    }
    std::vector<Curve> cs;
    for (std::size_t i = 0; i < n; ++i) {
        if (arcs[i]) cs.emplace_back(*arcs[i]);
        cs.emplace_back(LineSegment{out[i], in[(i + 1) % n]});
    }
    return Loop::of_curves(std::move(cs));
}

inline Loop polygon(const std::vector<Point2>& pts) { return rounded_polygon(pts, {}); }

inline std::vector<Point2> box_points(double w, double h)
{
    return {{-w / 2, -h / 2}, {w / 2, -h / 2}, {w / 2, h / 2}, {-w / 2, h / 2}};
}

// I-beam standing on a flange: total width w, height h, flange thickness f,
// web thickness t, with fillets of radius r where web meets flange.
inline Profile ibeam_profile(double w, double h, double f, double t, double r)
{
    const double x = w / 2, y = h / 2, e = t / 2;
    const std::vector<Point2> pts = {
        {-x, -y}, {x, -y}, {x, -y + f}, {e, -y + f}, {e, y - f}, {x, y - f},
        {x, y},   {-x, y}, {-x, y - f}, {-e, y - f}, {-e, -y + f}, {-x, -y + f},
    };
    std::vector<double> radii(pts.size(), 0.0);
    for (std::size_t i : {3u, 4u, 9u, 10u}) radii[i] = r;
    return Profile{{rounded_polygon(pts, radii)}};
}

// The I-beam behind the shipped fixture: a centred datum gives three
// parameters (flange offset, web half width, fillet radius).
inline Profile ibeam_fixture_profile() { return ibeam_profile(40, 50, 8, 10, 4); }
inline constexpr std::uint64_t kIBeamFixtureSeed = 4;

class CorpusGenerator {
public:
    explicit CorpusGenerator(std::uint64_t seed) : rng_(seed) {}

    Profile next() { return make(pick_family()); }

    ShapeFamily pick_family()
    {
        return kAllShapeFamilies[std::uniform_int_distribution<std::size_t>(0, kAllShapeFamilies.size() - 1)(rng_)];
    }

    Profile make(ShapeFamily f)
    {
        Profile p = build(f);
        // arbitrary placement in model units; normalization undoes it
        const double scale = uni(0.5, 4.0);
        const Point2 off{uni(-100.0, 100.0), uni(-100.0, 100.0)};
        return transformed(p, scale, off);
    }

private:
    std::mt19937_64 rng_;

    double uni(double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng_); }
    int pick(int a, int b) { return std::uniform_int_distribution<int>(a, b)(rng_); }
    // lengths land on a 0.5 grid, as drawn parts tend to
    double dim(double a, double b) { return std::round(uni(a, b) * 2.0) / 2.0; }

    static Loop hole(Point2 c, double r) { return Loop::of_circle({c, r, false}); }

    Profile build(ShapeFamily f)
    {
        switch (f) {
        case ShapeFamily::Rectangle: return {{polygon(box_points(dim(10, 60), dim(10, 60)))}};
        case ShapeFamily::FilletedPlate: {
            const double w = dim(20, 60), h = dim(20, 60);
            const double r = dim(2, std::min(w, h) / 4);
            std::vector<double> radii(4, 0.0);
            const int k = pick(1, 4);
            for (int i = 0; i < k; ++i) radii[static_cast<std::size_t>(i)] = r;
            return {{rounded_polygon(box_points(w, h), radii)}};
        }
        case ShapeFamily::UBracket: {
            const double w = dim(20, 60), h = dim(15, 50);
            const double t = dim(3, std::min(w / 4, h / 3));
            const double x = w / 2;
            return {{polygon({{-x, 0}, {x, 0}, {x, h}, {x - t, h}, {x - t, t}, {-x + t, t}, {-x + t, h}, {-x, h}})}};
        }
        case ShapeFamily::IBeam: {
            const double w = dim(20, 50), h = dim(25, 60);
            const double f = dim(3, h / 5), t = dim(3, w / 4);
            const double r = pick(0, 1) ? dim(1, std::min(f, (w - t) / 4)) : 0.0;
            return ibeam_profile(w, h, f, t, r);
        }
        case ShapeFamily::HolePlate: {
            const double w = dim(30, 80), h = dim(20, 60);
            const double r = dim(1.5, std::min(w, h) / 8);
            const double ix = w / 2 - dim(2 * r, w / 4), iy = h / 2 - dim(2 * r, h / 4);
            Profile p{{polygon(box_points(w, h))}};
            switch (pick(0, 2)) {
            case 0: p.loops.push_back(hole({0, 0}, r)); break;
            case 1:
                p.loops.push_back(hole({-ix, 0}, r));
                p.loops.push_back(hole({ix, 0}, r));
                break;
            default:
                for (double sx : {-1.0, 1.0})
                    for (double sy : {-1.0, 1.0}) p.loops.push_back(hole({sx * ix, sy * iy}, r));
            }
            return p;
        }
        case ShapeFamily::Stadium: {
            const double l = dim(10, 60), r = dim(4, 20);
            Profile p{{Loop::of_curves({
                LineSegment{{-l / 2, -r}, {l / 2, -r}},
                ArcSegment{{l / 2, -r}, {l / 2 + r, 0}, {l / 2, r}},
                LineSegment{{l / 2, r}, {-l / 2, r}},
                ArcSegment{{-l / 2, r}, {-l / 2 - r, 0}, {-l / 2, -r}},
            })}};
            if (pick(0, 1)) {
                const double hr = dim(1, r / 2);
                p.loops.push_back(hole({-l / 2, 0}, hr));
                p.loops.push_back(hole({l / 2, 0}, hr));
            }
            return p;
        }
        case ShapeFamily::Washer: {
            const double r = dim(10, 40);
            const double ri = dim(2, r - 3);
            return {{Loop::of_circle({{0, 0}, r, true}), hole({0, 0}, ri)}};
        }
        case ShapeFamily::ArchedPlate: {
            // rises below w/4 push the arc centre out of the encodable domain
            const double w = dim(20, 60), h = dim(10, 40), rise = dim(w / 4, w / 2);
            const double x = w / 2;
            return {{Loop::of_curves({
                LineSegment{{-x, 0}, {x, 0}},
                LineSegment{{x, 0}, {x, h}},
                ArcSegment{{x, h}, {0, h + rise}, {-x, h}},
                LineSegment{{-x, h}, {-x, 0}},
            })}};
        }
        case ShapeFamily::ChamferedPlate: {
            const double w = dim(20, 60), h = dim(20, 60);
            const double c = dim(2, std::min(w, h) / 4);
            const double x = w / 2, y = h / 2;
            std::vector<Point2> pts = {{-x, -y}, {x - c, -y}, {x, -y + c}, {x, y - c}, {x - c, y}, {-x, y}};
            if (pick(0, 1)) pts = {{-x + c, -y}, {x - c, -y}, {x, -y + c}, {x, y - c}, {x - c, y}, {-x + c, y}, {-x, y - c}, {-x, -y + c}};
            return {{polygon(pts)}};
        }
        case ShapeFamily::Trapezoid: {
            // flanks at a whole number of degrees off vertical
            const double w = dim(30, 60), h = dim(10, 30);
            const double x = w / 2;
            // keep the top edge at least 40% of the base so the flanks never cross
            const int steep = std::min(40, static_cast<int>(std::atan(0.6 * x / h) * 180.0 / kPi));
            const double lean = std::tan(pick(5, steep) * kPi / 180.0) * h;
            if (pick(0, 1)) return {{polygon({{-x, 0}, {x, 0}, {x - lean, h}, {-x + lean, h}})}};
            const double skew = std::tan(pick(5, 30) * kPi / 180.0) * h;
            return {{polygon({{-x, 0}, {x, 0}, {x + skew, h}, {-x + skew + lean, h}})}};
        }
        }
        return {};
    }
};

inline std::vector<Profile> generate_corpus(std::size_t n, std::uint64_t seed)
{
    CorpusGenerator gen(seed);
    std::vector<Profile> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) out.push_back(gen.next());
    return out;
}

}  // namespace pforge
