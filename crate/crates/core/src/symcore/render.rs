//! Grammar-conforming text output, so that `parse(render(e))` denotes `e`.

use std::fmt;

use num_traits::{One, Signed};

use super::expr::{Expr, Q};

const ADD: u8 = 1;
const MUL: u8 = 2;
const ATOM: u8 = 5;

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render(self, 0))
    }
}

fn render(e: &Expr, ctx: u8) -> String {
    match e {
        Expr::Num(c) => render_num(c, ctx),
        Expr::Sym(s) => s.name().to_string(),
        Expr::Add(terms) => {
            let mut out = String::new();
            for (i, term) in terms.iter().enumerate() {
                let (neg, abs) = split_sign(term);
                match (i, neg) {
                    (0, false) => {}
                    (0, true) => out.push('-'),
                    (_, false) => out.push_str(" + "),
                    (_, true) => out.push_str(" - "),
                }
                out.push_str(&render(&abs, MUL));
            }
            paren(out, ctx > ADD)
        }
        Expr::Mul(_) => render_product(e, ctx),
        Expr::Pow(base, ex) => {
            if ex.is_negative() {
                return render_product(e, ctx);
            }
            if *ex == Q::new(1.into(), 2.into()) {
                return format!("sqrt({})", render(base, 0));
            }
            let b = render(base, ATOM);
            if ex.is_integer() {
                format!("{b}^{}", ex.numer())
            } else {
                format!("{b}^({}/{})", ex.numer(), ex.denom())
            }
        }
        Expr::Fun(func, arg) => format!("{}({})", func.name(), render(arg, 0)),
    }
}

fn render_num(c: &Q, ctx: u8) -> String {
    let text = if c.is_integer() {
        c.numer().to_string()
    } else {
        format!("{}/{}", c.numer(), c.denom())
    };
    let needs = (c.is_negative() && ctx > ADD) || (!c.is_integer() && ctx > MUL);
    paren(text, needs)
}

fn paren(s: String, yes: bool) -> String {
    if yes {
        format!("({s})")
    } else {
        s
    }
}

/// Splits a leading negative coefficient off a term.
fn split_sign(e: &Expr) -> (bool, Expr) {
    match e {
        Expr::Num(c) if c.is_negative() => (true, Expr::Num(-c)),
        Expr::Mul(items) => match items.first() {
            Some(Expr::Num(c)) if c.is_negative() => {
                let mut rest = items.clone();
                rest[0] = Expr::Num(-c);
                (true, Expr::mul_all(rest))
            }
            _ => (false, e.clone()),
        },
        _ => (false, e.clone()),
    }
}

fn render_product(e: &Expr, ctx: u8) -> String {
    let items: Vec<Expr> = match e {
        Expr::Mul(items) => items.clone(),
        other => vec![other.clone()],
    };
    let mut coeff = Q::one();
    let mut num = Vec::new();
    let mut den = Vec::new();
    for it in items {
        match it {
            Expr::Num(c) => coeff *= c,
            Expr::Pow(b, ex) if ex.is_negative() => den.push(Expr::pow(*b, -ex)),
            other => num.push(other),
        }
    }
    let negative = coeff.is_negative();
    let coeff = coeff.abs();
    let mut top: Vec<String> = Vec::new();
    if !coeff.numer().is_one() || num.is_empty() {
        top.push(coeff.numer().to_string());
    }
    for f in &num {
        top.push(render(f, MUL + 1));
    }
    let mut out = String::new();
    if negative {
        out.push('-');
    }
    out.push_str(&top.join("*"));
    let mut bottom: Vec<String> = Vec::new();
    if !coeff.denom().is_one() {
        bottom.push(coeff.denom().to_string());
    }
    for f in &den {
        bottom.push(render(f, MUL));
    }
    if !bottom.is_empty() {
        out.push('/');
        let single_atomic = bottom.len() == 1 && den.iter().all(|d| !matches!(d, Expr::Mul(_) | Expr::Num(_)));
        if single_atomic {
            out.push_str(&bottom[0]);
        } else {
            out.push('(');
            out.push_str(&bottom.join("*"));
            out.push(')');
        }
    }
    paren(out, ctx > MUL || (negative && ctx > ADD))
}

#[cfg(test)]
mod tests {
    use crate::symcore::parse::parse;

    fn roundtrip(s: &str) -> String {
        let params = vec!["a".to_string(), "lam".to_string(), "k".to_string()];
        let e = parse(s, &params).unwrap();
        let text = e.to_string();
        let again = parse(&text, &params).unwrap();
        assert_eq!(e, again, "{s} -> {text}");
        text
    }

    #[test]
    fn renders_parseable_text() {
        assert_eq!(roundtrip("xdot^2/(2*(lam*x^2+1))"), "xdot^2/(2*(lam*x^2 + 1))");
        assert_eq!(roundtrip("-x^2 + 1"), "-x^2 + 1");
        roundtrip("x*(-a+lam*xdot^2)/(lam*x^2+1)");
        roundtrip("(xdot + x^2)^(-3)");
        roundtrip("sqrt(xdot + k*x^2/6 + 3*lam/(2*k))");
        roundtrip("exp(2*log(x) - log(t))");
        roundtrip("-1/(2*t^4*(x^2*t^2 + xdot*t^2 - 2*x*t + 2))");
        roundtrip("(1/3)^(1/2)");
        roundtrip("x^(-3/2) - 2/3");
        roundtrip("2^(1/2)*x");
    }
}
