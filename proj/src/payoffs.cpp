#include "adsens/payoffs.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <memory>
#include <sstream>

#include "adsens/error.hpp"
#include "adsens/spec_parse.hpp"

namespace adsens::payoffs {

namespace {

double path_average(const DiscretePath& x) {
    double s = 0.0;
    for (int n = 0; n <= x.steps(); ++n) s += x.at(n, 0);
    return s / static_cast<double>(x.steps() + 1);
}

void require_scalar(const DiscretePath& x, const char* name) {
    if (x.dim() != 1) throw ValidationError(std::string(name) + " payoff needs d = 1");
}

double ito_sum(const SigmaSpec& sigma, const DiscretePath& x, const TimeGrid& grid) {
    double h = 0.0;
    for (int k = 0; k < x.steps(); ++k) h += sigma.value(grid[k], x.at(k, 0)) * (x.at(k + 1, 0) - x.at(k, 0));
    return h;
}

}  // namespace

Payoff linear(std::vector<double> a) {
    if (a.empty()) throw ValidationError("linear payoff needs a coefficient vector");
    Payoff f;
    f.name = "linear";
    f.evaluate = [a](const DiscretePath& x, const TimeGrid&) {
        if (static_cast<std::size_t>(x.dim()) != a.size()) throw ValidationError("linear payoff: dimension mismatch");
        double s = 0.0;
        for (int i = 0; i < x.dim(); ++i) s += a[i] * x.at(x.steps(), i);
        return s;
    };
    f.gradient = [a](const DiscretePath& x, const TimeGrid&, GradientField& out) {
        if (static_cast<std::size_t>(x.dim()) != a.size()) throw ValidationError("linear payoff: dimension mismatch");
        std::fill(out.data().begin(), out.data().end(), 0.0);
        for (int i = 0; i < x.dim(); ++i) out.at(x.steps(), i) = a[i];
    };
    return f;
}

Payoff asian(double strike) {
    Payoff f;
    f.name = "asian";
    f.evaluate = [strike](const DiscretePath& x, const TimeGrid&) {
        require_scalar(x, "asian");
        return std::max(0.0, path_average(x) - strike);
    };
    f.gradient = [strike](const DiscretePath& x, const TimeGrid&, GradientField& out) {
        require_scalar(x, "asian");
        const double g = path_average(x) >= strike ? 1.0 / static_cast<double>(x.steps() + 1) : 0.0;
        std::fill(out.data().begin(), out.data().end(), g);
    };
    f.at_kink = [strike](const DiscretePath& x, const TimeGrid&) {
        return std::abs(path_average(x) - strike) <= 1e-12 * std::max(1.0, std::abs(strike));
    };
    return f;
}

Payoff asian_squared() {
    Payoff f;
    f.name = "asian_sq";
    f.growth_p = 2.0;
    f.evaluate = [](const DiscretePath& x, const TimeGrid&) {
        require_scalar(x, "asian_sq");
        const double a = path_average(x);
        return 0.5 * a * a;
    };
    f.gradient = [](const DiscretePath& x, const TimeGrid&, GradientField& out) {
        require_scalar(x, "asian_sq");
        const double g = path_average(x) / static_cast<double>(x.steps() + 1);
        std::fill(out.data().begin(), out.data().end(), g);
    };
    return f;
}

Payoff quadratic_variation() {
    Payoff f;
    f.name = "quad_var";
    f.growth_p = 2.0;
    f.evaluate = [](const DiscretePath& x, const TimeGrid&) {
        double s = 0.0;
        for (int n = 1; n <= x.steps(); ++n) {
            for (int i = 0; i < x.dim(); ++i) {
                const double dx = x.at(n, i) - x.at(n - 1, i);
                s += dx * dx;
            }
        }
        return 0.5 * s;
    };
    f.gradient = [](const DiscretePath& x, const TimeGrid&, GradientField& out) {
        for (int k = 1; k <= x.steps(); ++k) {
            for (int i = 0; i < x.dim(); ++i) {
                const double here = x.at(k, i) - x.at(k - 1, i);
                const double next = k < x.steps() ? x.at(k + 1, i) - x.at(k, i) : 0.0;
                out.at(k, i) = here - next;
            }
        }
    };
    return f;
}

Payoff cubic(double c3, double c2) {
    Payoff f;
    f.name = "cubic";
    f.growth_p = 3.0;
    f.evaluate = [c3, c2](const DiscretePath& x, const TimeGrid&) {
        require_scalar(x, "cubic");
        const double y = x.at(x.steps(), 0);
        return c3 * y * y * y + c2 * y * y;
    };
    f.gradient = [c3, c2](const DiscretePath& x, const TimeGrid&, GradientField& out) {
        require_scalar(x, "cubic");
        std::fill(out.data().begin(), out.data().end(), 0.0);
        const double y = x.at(x.steps(), 0);
        out.at(x.steps(), 0) = 3.0 * c3 * y * y + 2.0 * c2 * y;
    };
    return f;
}

Payoff merton(double lambda, double rate, double kappa, double horizon) {
    if (!(kappa > 0.0)) throw ValidationError("merton: initial wealth kappa must be positive");
    const double level = std::log(kappa) + (rate + 0.5 * lambda * lambda) * horizon;
    Payoff f;
    f.name = "merton";
    f.evaluate = [lambda, level](const DiscretePath& x, const TimeGrid&) {
        require_scalar(x, "merton");
        return level + lambda * x.at(x.steps(), 0);
    };
    f.gradient = [lambda](const DiscretePath& x, const TimeGrid&, GradientField& out) {
        std::fill(out.data().begin(), out.data().end(), 0.0);
        out.at(x.steps(), 0) = lambda;
    };
    return f;
}

Payoff ito_utility(SigmaSpec sigma, UtilitySpec utility) {
    Payoff f;
    f.name = "ito_utility";
    f.growth_p = 2.0;
    f.evaluate = [sigma, utility](const DiscretePath& x, const TimeGrid& grid) {
        require_scalar(x, "ito_utility");
        return utility.value(ito_sum(sigma, x, grid));
    };
    f.gradient = [sigma, utility](const DiscretePath& x, const TimeGrid& grid, GradientField& out) {
        require_scalar(x, "ito_utility");
        const double slope = utility.d1(ito_sum(sigma, x, grid));
        const int steps = x.steps();
        for (int j = 1; j <= steps; ++j) {
            // dH/dx_j = sigma(t_{j-1}, x_{j-1}) + [d_x sigma(t_j, x_j) dx_{j+1} - sigma(t_j, x_j)] for j < N
            double dh = sigma.value(grid[j - 1], x.at(j - 1, 0));
            if (j < steps) {
                dh += sigma.dx(grid[j], x.at(j, 0)) * (x.at(j + 1, 0) - x.at(j, 0)) - sigma.value(grid[j], x.at(j, 0));
            }
            out.at(j, 0) = slope * dh;
        }
    };
    return f;
}

Payoff log_contract(SigmaSpec sigma) {
    Payoff f = ito_utility(std::move(sigma), UtilitySpec::quadratic(1.0));
    f.name = "log_contract";
    return f;
}

// ---------------------------------------------------------------------------
// expression payoffs

namespace {

using Node = std::function<double(const DiscretePath&, const TimeGrid&)>;

class ExpressionParser {
public:
    explicit ExpressionParser(std::string text) : src_(std::move(text)) {}

    Node parse() {
        Node n = parse_sum();
        skip_space();
        if (pos_ != src_.size()) fail("unexpected '" + std::string(1, src_[pos_]) + "'");
        return n;
    }

private:
    [[noreturn]] void fail(const std::string& msg) const {
        throw ValidationError("expression payoff, column " + std::to_string(pos_ + 1) + ": " + msg);
    }

    void skip_space() {
        while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    }

    bool accept(char c) {
        skip_space();
        if (pos_ < src_.size() && src_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    Node parse_sum() {
        Node lhs = parse_product();
        for (;;) {
            if (accept('+')) {
                Node rhs = parse_product();
                lhs = [lhs, rhs](const DiscretePath& x, const TimeGrid& g) { return lhs(x, g) + rhs(x, g); };
            } else if (accept('-')) {
                Node rhs = parse_product();
                lhs = [lhs, rhs](const DiscretePath& x, const TimeGrid& g) { return lhs(x, g) - rhs(x, g); };
            } else {
                return lhs;
            }
        }
    }

    Node parse_product() {
        Node lhs = parse_unary();
        for (;;) {
            if (accept('*')) {
                Node rhs = parse_unary();
                lhs = [lhs, rhs](const DiscretePath& x, const TimeGrid& g) { return lhs(x, g) * rhs(x, g); };
            } else if (accept('/')) {
                Node rhs = parse_unary();
                lhs = [lhs, rhs](const DiscretePath& x, const TimeGrid& g) { return lhs(x, g) / rhs(x, g); };
            } else {
                return lhs;
            }
        }
    }

    Node parse_unary() {
        if (accept('-')) {
            Node inner = parse_unary();
            return [inner](const DiscretePath& x, const TimeGrid& g) { return -inner(x, g); };
        }
        if (accept('+')) return parse_unary();
        return parse_power();
    }

    Node parse_power() {
        Node base = parse_primary();
        if (accept('^')) {
            Node expo = parse_unary();
            return [base, expo](const DiscretePath& x, const TimeGrid& g) { return std::pow(base(x, g), expo(x, g)); };
        }
        return base;
    }

    Node parse_primary() {
        skip_space();
        if (pos_ >= src_.size()) fail("unexpected end of input");
        const char c = src_[pos_];
        if (accept('(')) {
            Node inner = parse_sum();
            if (!accept(')')) fail("expected ')'");
            return inner;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            std::size_t used = 0;
            const double v = std::stod(src_.substr(pos_), &used);
            pos_ += used;
            return [v](const DiscretePath&, const TimeGrid&) { return v; };
        }
        if (std::isalpha(static_cast<unsigned char>(c))) return parse_identifier();
        fail("unexpected '" + std::string(1, c) + "'");
    }

    Node parse_identifier() {
        const std::size_t start = pos_;
        while (pos_ < src_.size() &&
               (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) {
            ++pos_;
        }
        const std::string id = src_.substr(start, pos_ - start);
        if (accept('(')) return parse_call(id);
        if (id == "avg") return [](const DiscretePath& x, const TimeGrid&) { return path_average(x); };
        if (id == "N") return [](const DiscretePath& x, const TimeGrid&) { return static_cast<double>(x.steps()); };
        if (id == "T") return [](const DiscretePath&, const TimeGrid& g) { return g.horizon(); };
        if (id.size() > 1 && id[0] == 'x' && std::isdigit(static_cast<unsigned char>(id[1]))) {
            const auto under = id.find('_');
            const int n = std::stoi(id.substr(1, under == std::string::npos ? std::string::npos : under - 1));
            const int i = under == std::string::npos ? 0 : std::stoi(id.substr(under + 1)) - 1;
            if (i < 0) fail("components are 1-based");
            return [n, i, id](const DiscretePath& x, const TimeGrid&) {
                if (n > x.steps() || i >= x.dim()) throw ValidationError("expression variable " + id + " out of range");
                return x.at(n, i);
            };
        }
        fail("unknown identifier '" + id + "'");
    }

    Node parse_call(const std::string& fn) {
        std::vector<Node> args;
        if (!accept(')')) {
            do {
                args.push_back(parse_sum());
            } while (accept(','));
            if (!accept(')')) fail("expected ')' after arguments");
        }
        auto unary = [&](double (*op)(double)) -> Node {
            if (args.size() != 1) fail(fn + " takes one argument");
            Node a = args[0];
            return [a, op](const DiscretePath& x, const TimeGrid& g) { return op(a(x, g)); };
        };
        if (fn == "exp") return unary([](double v) { return std::exp(v); });
        if (fn == "log") return unary([](double v) { return std::log(v); });
        if (fn == "sin") return unary([](double v) { return std::sin(v); });
        if (fn == "cos") return unary([](double v) { return std::cos(v); });
        if (fn == "tanh") return unary([](double v) { return std::tanh(v); });
        if (fn == "sqrt") return unary([](double v) { return std::sqrt(v); });
        if (fn == "abs") return unary([](double v) { return std::abs(v); });
        if (fn == "pos") return unary([](double v) { return std::max(v, 0.0); });
        if (fn == "max" || fn == "min") {
            if (args.size() != 2) fail(fn + " takes two arguments");
            Node a = args[0], b = args[1];
            if (fn == "max") return [a, b](const DiscretePath& x, const TimeGrid& g) { return std::max(a(x, g), b(x, g)); };
            return [a, b](const DiscretePath& x, const TimeGrid& g) { return std::min(a(x, g), b(x, g)); };
        }
        fail("unknown function '" + fn + "'");
    }

    std::string src_;
    std::size_t pos_ = 0;
};

}  // namespace

Payoff expression(const std::string& source) {
    Payoff f;
    f.name = "expr";
    f.evaluate = ExpressionParser(source).parse();
    return f;
}

Payoff parse(const std::string& spec, int dim) {
    const FamilySpec f = parse_family(spec);
    if (f.family == "linear") {
        std::vector<double> a(static_cast<std::size_t>(dim), 1.0);
        const std::string raw = f.has("a") ? f.text("a", "") : f.positional;
        if (!raw.empty()) a = parse_number_list(raw, ';');
        if (a.size() == 1 && dim > 1) a.assign(static_cast<std::size_t>(dim), a[0]);
        if (static_cast<int>(a.size()) != dim) throw ValidationError("linear payoff: a has wrong dimension");
        return linear(std::move(a));
    }
    if (f.family == "asian") {
        return asian(f.positional.empty() ? f.number("K", 0.0) : parse_number(f.positional, "asian strike"));
    }
    if (f.family == "asian_sq") return asian_squared();
    if (f.family == "quad_var") return quadratic_variation();
    if (f.family == "cubic") return cubic(f.number("c3", 1.0), f.number("c2", 0.0));
    if (f.family == "merton") {
        return merton(f.number("lambda"), f.number("r", 0.0), f.number("kappa", 1.0), f.number("T", 1.0));
    }
    if (f.family == "log_contract") {
        if (f.has("b")) return log_contract(SigmaSpec::tanh(f.number("a"), f.number("b")));
        return log_contract(SigmaSpec::constant(f.positional.empty() ? f.number("c") : parse_number(f.positional, "sigma")));
    }
    if (f.family == "expr") {
        const std::string file = f.positional.empty() ? f.text("file", "") : f.positional;
        std::ifstream in(file);
        if (!in) throw ValidationError("cannot open expression file '" + file + "'");
        std::stringstream buf;
        buf << in.rdbuf();
        return expression(buf.str());
    }
    throw ValidationError("unknown payoff '" + f.family + "'");
}

}  // namespace adsens::payoffs
