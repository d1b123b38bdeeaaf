use std::fmt;

use num_complex::Complex64;

use super::{Expr, Node};

const SUM: u8 = 1;
const PRODUCT: u8 = 2;
const UNARY: u8 = 3;
const POWER: u8 = 4;
const ATOM: u8 = 5;

struct Printed {
    text: String,
    prec: u8,
    leading_minus: bool,
}

impl Printed {
    fn new(text: String, prec: u8) -> Self {
        let leading_minus = text.starts_with('-');
        Printed { text, prec, leading_minus }
    }

    fn at_least(self, prec: u8, allow_minus: bool) -> String {
        if self.prec < prec || (self.leading_minus && !allow_minus) {
            format!("({})", self.text)
        } else {
            self.text
        }
    }
}

fn number(x: f64) -> String {
    let a = x.abs();
    if a == 0.0 {
        "0".into()
    } else if (1e-4..1e16).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

fn constant(c: Complex64) -> Printed {
    let (re, im) = (c.re, c.im);
    if im == 0.0 {
        let prec = if re < 0.0 { UNARY } else { ATOM };
        return Printed::new(number(re), prec);
    }
    let imag = match im {
        x if x == 1.0 => Printed::new("i".into(), ATOM),
        x if x == -1.0 => Printed::new("-i".into(), UNARY),
        x => Printed::new(format!("{}*i", number(x)), PRODUCT),
    };
    if re == 0.0 {
        return imag;
    }
    let text = if imag.leading_minus {
        format!("{} - {}", number(re), &imag.text[1..])
    } else {
        format!("{} + {}", number(re), imag.text)
    };
    Printed::new(text, SUM)
}

fn print(e: &Expr) -> Printed {
    match e.node() {
        Node::Const(c) => constant(*c),
        Node::Var(v) => Printed::new(v.to_string(), ATOM),
        Node::Add(a, b) | Node::Sub(a, b) => {
            let op = if matches!(e.node(), Node::Add(..)) { "+" } else { "-" };
            let left = print(a).at_least(SUM, true);
            let right = print(b).at_least(PRODUCT, false);
            Printed::new(format!("{left} {op} {right}"), SUM)
        }
        Node::Mul(a, b) | Node::Div(a, b) => {
            let op = if matches!(e.node(), Node::Mul(..)) { "*" } else { "/" };
            let left = print(a).at_least(PRODUCT, true);
            let right = print(b).at_least(POWER, false);
            Printed::new(format!("{left}{op}{right}"), PRODUCT)
        }
        Node::Neg(a) => Printed::new(format!("-{}", print(a).at_least(UNARY, false)), UNARY),
        Node::Pow(a, n) => Printed::new(format!("{}^{n}", print(a).at_least(ATOM, false)), POWER),
        Node::Exp(a) => Printed::new(format!("exp({})", print(a).text), ATOM),
        Node::Sin(a) => Printed::new(format!("sin({})", print(a).text), ATOM),
        Node::Cos(a) => Printed::new(format!("cos({})", print(a).text), ATOM),
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print(self).text)
    }
}

#[cfg(test)]
mod tests {
    use super::super::{parse, random, Expr};
    use num_complex::Complex64;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn fixed_point(src: &str) {
        let once = parse(src).unwrap().to_string();
        let twice = parse(&once).unwrap().to_string();
        assert_eq!(once, twice, "source `{src}`");
    }

    #[test]
    fn corpus_round_trip() {
        let corpus = [
            "0",
            "1",
            "-1",
            "i",
            "-i",
            "2.5*i",
            "1 + 2*i",
            "1 - 2*i",
            "-1 - i",
            "y1",
            "y1 + y2 + y3",
            "y1 - (y2 - y3)",
            "y1*(y2*y3)",
            "y1/(y2/t)",
            "-y1^2",
            "(-y1)^2",
            "y1^-3",
            "exp(i*y1)",
            "exp(-y1^2/2)",
            "sin(y1)^2 + cos(y1)^2",
            "y1*-t",
            "y1 - -t",
            "2*y1 - 3*t",
            "exp(i*(y1 - t/2))",
            "(1 + i)*y1",
            "y1*(1 - i)",
            "1e-20*y1",
            "1.5e20 + t",
            "0.001*y1^2",
            "-(y1 + t)",
            "-(y1*t)",
            "-(-2)",
            "cos(sin(exp(t)))",
            "y1^2*y2^2*y3^2",
            "(y1 + t)^3/(1 + r^2)",
            "r*exp(2*i*r)",
            "y1*exp(i*r)",
            "-2*i*y1",
            "t*(-2*i)",
            "3 - (-2)*y1",
            "(y1 - t)*(y1 + t)",
            "exp(y1)*exp(-y1)",
            "1/(1 + y1^2)",
            "y12 + y2",
            "((((y1))))",
            "2^3*y1",
            "sin(0.5*t + i)",
            "-exp(t)",
            "-(2 + i)*t",
            "y1 + (y2 + (y3 + t))",
        ];
        assert_eq!(corpus.len(), 50);
        for src in corpus {
            fixed_point(src);
        }
    }

    #[test]
    fn printed_values_survive_reparse() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let e = random::random_expr(&mut rng, 2, &random::ExprShape::default());
            let s = e.to_string();
            let back = parse(&s).unwrap();
            assert_eq!(back.to_string(), s);
            assert!(super::super::equal(&e, &back, 1e-12), "{s}");
        }
    }

    #[test]
    fn constants() {
        assert_eq!(Expr::constant(Complex64::new(0.0, -2.0)).to_string(), "-2*i");
        assert_eq!(Expr::constant(Complex64::new(-1.0, 1.0)).to_string(), "-1 + i");
        assert_eq!((Expr::y(0) * Expr::real(-2.0)).to_string(), "y1*(-2)");
    }
}
