use super::Expr;

fn bx(e: Expr) -> Box<Expr> {
    Box::new(e)
}

impl Expr {
    /// Exact derivative with respect to `u`, simplified.
    pub fn diff(&self) -> Expr {
        self.diff_raw().simplify()
    }

    fn diff_raw(&self) -> Expr {
        match self {
            Expr::Constant(_) => Expr::Constant(0.0),
            Expr::Variable => Expr::Constant(1.0),
            Expr::Add(xs) => Expr::Add(xs.iter().map(Expr::diff_raw).collect()),
            Expr::Mul(xs) => Expr::Add(
                (0..xs.len())
                    .map(|i| {
                        let mut factors = xs.clone();
                        factors[i] = xs[i].diff_raw();
                        Expr::Mul(factors)
                    })
                    .collect(),
            ),
            Expr::Neg(a) => Expr::Neg(bx(a.diff_raw())),
            Expr::Div(n, d) => Expr::Div(
                bx(Expr::Add(vec![
                    Expr::Mul(vec![n.diff_raw(), (**d).clone()]),
                    Expr::Neg(bx(Expr::Mul(vec![(**n).clone(), d.diff_raw()]))),
                ])),
                bx(Expr::Pow(d.clone(), bx(Expr::Constant(2.0)))),
            ),
            Expr::Pow(b, e) if e.is_constant() => {
                // d(b^e) = e * b^(e-1) * b'
                let e_minus_one = Expr::Add(vec![(**e).clone(), Expr::Constant(-1.0)]);
                Expr::Mul(vec![(**e).clone(), Expr::Pow(b.clone(), bx(e_minus_one)), b.diff_raw()])
            }
            Expr::Pow(b, e) => {
                // b^e = exp(e log b)  =>  b^e * (e' log b + e b'/b)
                Expr::Mul(vec![
                    self.clone(),
                    Expr::Add(vec![
                        Expr::Mul(vec![e.diff_raw(), Expr::Log(b.clone())]),
                        Expr::Div(bx(Expr::Mul(vec![(**e).clone(), b.diff_raw()])), b.clone()),
                    ]),
                ])
            }
            Expr::Exp(a) => Expr::Mul(vec![self.clone(), a.diff_raw()]),
            Expr::Log(a) => Expr::Div(bx(a.diff_raw()), a.clone()),
            Expr::Sin(a) => Expr::Mul(vec![Expr::Cos(a.clone()), a.diff_raw()]),
            Expr::Cos(a) => Expr::Neg(bx(Expr::Mul(vec![Expr::Sin(a.clone()), a.diff_raw()]))),
            // sign(a) * a', undefined at a = 0
            Expr::Abs(a) => Expr::Mul(vec![Expr::Div(a.clone(), bx(self.clone())), a.diff_raw()]),
        }
    }

    /// Constant folding plus removal of additive zeros and multiplicative
    /// ones. Not a canonical form.
    pub fn simplify(&self) -> Expr {
        let s = match self {
            Expr::Constant(_) | Expr::Variable => return self.clone(),
            Expr::Add(xs) => simplify_add(xs),
            Expr::Mul(xs) => simplify_mul(xs),
            Expr::Neg(a) => match a.simplify() {
                Expr::Constant(c) => Expr::Constant(-c),
                Expr::Neg(inner) => *inner,
                other => Expr::Neg(bx(other)),
            },
            Expr::Div(n, d) => {
                let (n, d) = (n.simplify(), d.simplify());
                match (&n, &d) {
                    (_, Expr::Constant(c)) if *c == 1.0 => n,
                    _ => Expr::Div(bx(n), bx(d)),
                }
            }
            Expr::Pow(b, e) => {
                let (b, e) = (b.simplify(), e.simplify());
                match (&b, &e) {
                    (_, Expr::Constant(c)) if *c == 1.0 => b,
                    (_, Expr::Constant(c)) if *c == 0.0 => Expr::Constant(1.0),
                    (Expr::Constant(c), _) if *c == 1.0 => Expr::Constant(1.0),
                    _ => Expr::Pow(bx(b), bx(e)),
                }
            }
            Expr::Exp(a) => Expr::Exp(bx(a.simplify())),
            Expr::Log(a) => Expr::Log(bx(a.simplify())),
            Expr::Sin(a) => Expr::Sin(bx(a.simplify())),
            Expr::Cos(a) => Expr::Cos(bx(a.simplify())),
            Expr::Abs(a) => Expr::Abs(bx(a.simplify())),
        };
        fold_constant(s)
    }
}

fn fold_constant(e: Expr) -> Expr {
    if matches!(e, Expr::Constant(_)) || !e.is_constant() {
        return e;
    }
    match e.eval(0.0) {
        Ok(v) => Expr::Constant(v),
        Err(_) => e,
    }
}

fn simplify_add(xs: &[Expr]) -> Expr {
    let mut terms = Vec::with_capacity(xs.len());
    let mut constant = 0.0;
    for x in xs {
        match x.simplify() {
            Expr::Constant(c) => constant += c,
            Expr::Add(inner) => {
                for t in inner {
                    match t {
                        Expr::Constant(c) => constant += c,
                        other => terms.push(other),
                    }
                }
            }
            other => terms.push(other),
        }
    }
    if constant != 0.0 {
        terms.push(Expr::Constant(constant));
    }
    match terms.len() {
        0 => Expr::Constant(0.0),
        1 => terms.pop().unwrap(),
        _ => Expr::Add(terms),
    }
}

fn simplify_mul(xs: &[Expr]) -> Expr {
    let mut factors = Vec::with_capacity(xs.len());
    let mut constant = 1.0;
    let absorb = |e: Expr, factors: &mut Vec<Expr>, constant: &mut f64| match e {
        Expr::Constant(c) => *constant *= c,
        Expr::Neg(inner) => {
            *constant = -*constant;
            factors.push(*inner);
        }
        other => factors.push(other),
    };
    for x in xs {
        match x.simplify() {
            Expr::Mul(inner) => {
                for t in inner {
                    absorb(t, &mut factors, &mut constant);
                }
            }
            other => absorb(other, &mut factors, &mut constant),
        }
    }
    if constant == 0.0 {
        return Expr::Constant(0.0);
    }
    let body = match factors.len() {
        0 => return Expr::Constant(constant),
        1 => factors.pop().unwrap(),
        _ => Expr::Mul(factors),
    };
    if constant == 1.0 {
        body
    } else if constant == -1.0 {
        Expr::Neg(bx(body))
    } else {
        match body {
            Expr::Mul(mut fs) => {
                fs.insert(0, Expr::Constant(constant));
                Expr::Mul(fs)
            }
            other => Expr::Mul(vec![Expr::Constant(constant), other]),
        }
    }
}
