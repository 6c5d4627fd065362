//! Random well-formed TSIA programs for differential testing.
//!
//! Routine `r<i>` may call `r<j>` for j > i, and itself through its depth
//! parameter `d` under `if (d > 0)`. Array parameters have constant
//! lengths so that every index and slice the generator writes is in
//! bounds. Loops never contain calls, routines with array parameters never
//! recurse, and out parameters are written but never read, so every
//! program compiles in every mode and its result is fully determined.

use std::fmt::Write;

use rand::seq::IndexedRandom;
use rand::Rng;

use taskframe::machine::EntryCall;

#[derive(Debug, Clone)]
pub struct GenConfig {
    pub routines: usize,
    pub stmts: usize,
    pub arrays: bool,
    pub effects: bool,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig { routines: 4, stmts: 5, arrays: true, effects: true }
    }
}

#[derive(Debug, Clone)]
pub struct Generated {
    pub source: String,
    pub entry: EntryCall,
}

#[derive(Debug, Clone)]
struct Arr {
    name: String,
    len: usize,
    writable: bool,
    /// Out arrays are write-only, like out scalars.
    readable: bool,
}

#[derive(Debug, Clone)]
struct Sig {
    ins: usize,
    in_array: Option<usize>,
    inouts: usize,
    outs: usize,
    out_array: Option<usize>,
    prints: bool,
}

#[derive(Debug, Clone, Default)]
struct Scope {
    /// Readable scalars; the writable ones are also in `writable`.
    readable: Vec<String>,
    writable: Vec<String>,
    arrays: Vec<Arr>,
    /// Out parameters: write-only.
    outs: Vec<String>,
}

struct Body<'a, R: Rng> {
    rng: &'a mut R,
    sigs: &'a [Sig],
    me: usize,
    names: usize,
    calls: usize,
    prints: bool,
    effects: bool,
    /// Out parameters written by a top-level call.
    covered: Vec<String>,
}

impl<R: Rng> Body<'_, R> {
    fn fresh(&mut self, prefix: &str) -> String {
        self.names += 1;
        format!("{prefix}{}", self.names)
    }

    fn expr(&mut self, sc: &Scope, depth: u32) -> String {
        let roll = self.rng.random_range(0..10);
        if depth == 0 || roll < 4 {
            return self.atom(sc);
        }
        let a = self.expr(sc, depth - 1);
        match roll {
            4 => format!("-({a})"),
            5 => format!("({a}) / {}", self.rng.random_range(1..5)),
            6 => format!("({a}) % {}", self.rng.random_range(1..7)),
            _ => {
                let op = ["+", "-", "*", "<", "<=", ">", ">=", "==", "!=", "+", "-"].choose(self.rng).unwrap();
                let b = self.expr(sc, depth - 1);
                format!("({a} {op} {b})")
            }
        }
    }

    fn atom(&mut self, sc: &Scope) -> String {
        match self.rng.random_range(0..6) {
            0 | 1 => self.rng.random_range(-3..10).to_string(),
            2 if sc.arrays.iter().any(|a| a.readable) => {
                let rs: Vec<&Arr> = sc.arrays.iter().filter(|a| a.readable).collect();
                let a = *rs.choose(self.rng).unwrap();
                if a.len == 0 {
                    return "1".into();
                }
                format!("{}[{}]", a.name, self.rng.random_range(0..a.len))
            }
            _ => match sc.readable.choose(self.rng) {
                Some(v) => v.clone(),
                None => self.rng.random_range(0..5).to_string(),
            },
        }
    }

    fn block(&mut self, sc: &mut Scope, n: usize, depth: u32, calls: bool, out: &mut String, top: bool) {
        for _ in 0..n {
            self.stmt(sc, depth, calls, out, top);
        }
    }

    fn stmt(&mut self, sc: &mut Scope, depth: u32, calls: bool, out: &mut String, top: bool) {
        let roll = self.rng.random_range(0..12);
        match roll {
            0 | 1 => {
                let name = self.fresh("t");
                let e = self.expr(sc, 2);
                let _ = write!(out, "int {name}={e}; ");
                sc.readable.push(name.clone());
                sc.writable.push(name);
            }
            2 | 3 if !sc.writable.is_empty() => {
                let v = sc.writable.choose(self.rng).unwrap().clone();
                let op = ["=", "+=", "-=", "*="].choose(self.rng).unwrap();
                let e = self.expr(sc, 2);
                let _ = write!(out, "{v}{op}{e}; ");
            }
            4 if sc.arrays.iter().any(|a| a.writable && a.len > 0) => {
                let ws: Vec<&Arr> = sc.arrays.iter().filter(|a| a.writable && a.len > 0).collect();
                let a = (*ws.choose(self.rng).unwrap()).clone();
                let i = self.rng.random_range(0..a.len);
                let e = self.expr(sc, 2);
                let _ = write!(out, "{}[{i}]={e}; ", a.name);
            }
            5 if depth > 0 => {
                let c = self.expr(sc, 2);
                let _ = write!(out, "if ({c}) {{ ");
                let mut inner = sc.clone();
                let n = self.rng.random_range(1..3);
                self.block(&mut inner, n, depth - 1, calls, out, false);
                out.push_str("} ");
                if self.rng.random_bool(0.5) {
                    out.push_str("else { ");
                    let mut inner = sc.clone();
                    self.block(&mut inner, n, depth - 1, calls, out, false);
                    out.push_str("} ");
                }
            }
            6 if depth > 0 => {
                // counted loop, no calls inside
                let i = self.fresh("i");
                let bound = self.rng.random_range(0..5);
                let _ = write!(out, "int {i}=0; while ({i}<{bound}) {{ ");
                let mut inner = sc.clone();
                inner.readable.push(i.clone());
                let n = self.rng.random_range(1..3);
                self.block(&mut inner, n, 0, false, out, false);
                let _ = write!(out, "{i}+=1; }} ");
                sc.readable.push(i);
            }
            7 if self.effects && calls => {
                let e = self.expr(sc, 1);
                if self.rng.random_bool(0.3) {
                    let _ = write!(out, "putc(97+(({e}) % 26 + 26) % 26;;); ");
                } else {
                    let _ = write!(out, "puti({e};;); ");
                }
                self.prints = true;
            }
            8 if depth > 0 && self.sigs[self.me].in_array.is_none() && self.sigs[self.me].out_array.is_none() => {
                // self call, guarded by the depth parameter
                let _ = write!(out, "if (d > 0) {{ ");
                let mut inner = sc.clone();
                if calls && self.calls < 3 {
                    self.call(&mut inner, self.me, out, false);
                }
                out.push_str("} ");
            }
            _ if calls && self.calls < 3 && self.me + 1 < self.sigs.len() => {
                let j = self.rng.random_range(self.me + 1..self.sigs.len());
                self.call(sc, j, out, top);
            }
            _ => {
                let name = self.fresh("t");
                let e = self.expr(sc, 1);
                let _ = write!(out, "int {name}={e}; ");
                sc.readable.push(name.clone());
                sc.writable.push(name);
            }
        }
    }

    fn call(&mut self, sc: &mut Scope, j: usize, out: &mut String, top: bool) {
        self.calls += 1;
        let sig = self.sigs[j].clone();
        if sig.prints {
            self.prints = true;
        }
        let mut ins = Vec::new();
        ins.push(if j == self.me { "d-1".to_string() } else { self.rng.random_range(0..3).to_string() });
        for _ in 0..sig.ins {
            ins.push(self.expr(sc, 2));
        }
        let mut read_arrays: Vec<String> = Vec::new();
        if let Some(len) = sig.in_array {
            let fits: Vec<Arr> = sc.arrays.iter().filter(|a| a.readable && a.len >= len).cloned().collect();
            match fits.choose(self.rng) {
                Some(a) => {
                    let k = self.rng.random_range(0..=a.len - len);
                    ins.push(if k == 0 { a.name.clone() } else { format!("{}[{k}]", a.name) });
                    read_arrays.push(a.name.clone());
                }
                None => {
                    // make one
                    let name = self.fresh("b");
                    let _ = write!(out, "int {name}[{len}]; ");
                    for i in 0..len {
                        let e = self.expr(sc, 1);
                        let _ = write!(out, "{name}[{i}]={e}; ");
                    }
                    sc.arrays.push(Arr { name: name.clone(), len, writable: true, readable: true });
                    ins.push(name.clone());
                    read_arrays.push(name);
                }
            }
        }
        let mut written: Vec<String> = Vec::new();
        let mut inouts = Vec::new();
        for _ in 0..sig.inouts {
            let free: Vec<String> = sc.writable.iter().filter(|v| !written.contains(v)).cloned().collect();
            let v = match free.choose(self.rng) {
                Some(v) => v.clone(),
                None => {
                    let name = self.fresh("t");
                    let e = self.expr(sc, 1);
                    let _ = write!(out, "int {name}={e}; ");
                    sc.readable.push(name.clone());
                    sc.writable.push(name.clone());
                    name
                }
            };
            written.push(v.clone());
            inouts.push(v);
        }
        let mut outs = Vec::new();
        let mut fresh_scalars = Vec::new();
        for _ in 0..sig.outs {
            let free_out: Vec<String> =
                sc.outs.iter().filter(|v| !written.contains(v) && j != self.me).cloned().collect();
            let v = if !free_out.is_empty() && self.rng.random_bool(0.3) {
                let v = free_out.choose(self.rng).unwrap().clone();
                if top {
                    self.covered.push(v.clone());
                }
                v
            } else {
                let v = self.fresh("w");
                fresh_scalars.push(v.clone());
                v
            };
            written.push(v.clone());
            outs.push(v);
        }
        let mut fresh_array = None;
        if let Some(len) = sig.out_array {
            let fits: Vec<Arr> = sc
                .arrays
                .iter()
                .filter(|a| a.writable && a.len >= len && !read_arrays.contains(&a.name) && !written.contains(&a.name))
                .cloned()
                .collect();
            let arg = match fits.choose(self.rng) {
                Some(a) if self.rng.random_bool(0.5) => {
                    let k = self.rng.random_range(0..=a.len - len);
                    if k == 0 {
                        a.name.clone()
                    } else {
                        format!("{}[{k}]", a.name)
                    }
                }
                _ => {
                    let name = self.fresh("v");
                    fresh_array = Some(Arr { name: name.clone(), len, writable: true, readable: true });
                    name
                }
            };
            outs.push(arg);
        }
        let _ = write!(out, "r{j}({};{};{}); ", ins.join(","), inouts.join(","), outs.join(","));
        for v in fresh_scalars {
            sc.readable.push(v.clone());
            sc.writable.push(v);
        }
        if let Some(a) = fresh_array {
            sc.arrays.push(a);
        }
    }
}

/// Generates a program whose entry is `r0`.
pub fn generate<R: Rng>(rng: &mut R, cfg: &GenConfig) -> Generated {
    let n = cfg.routines.max(1);
    let mut sigs: Vec<Sig> = (0..n)
        .map(|i| Sig {
            ins: rng.random_range(0..3),
            in_array: (cfg.arrays && i > 0 && rng.random_bool(0.3)).then(|| rng.random_range(0..4)),
            inouts: rng.random_range(0..2),
            outs: rng.random_range(1..3),
            out_array: (cfg.arrays && i > 0 && rng.random_bool(0.3)).then(|| rng.random_range(1..4)),
            prints: false,
        })
        .collect();

    let mut bodies = vec![String::new(); n];
    for i in (0..n).rev() {
        let sig = sigs[i].clone();
        let mut sc = Scope::default();
        sc.readable.push("d".into());
        for k in 0..sig.ins {
            sc.readable.push(format!("x{k}"));
        }
        if let Some(len) = sig.in_array {
            sc.arrays.push(Arr { name: "a".into(), len, writable: false, readable: true });
        }
        for k in 0..sig.inouts {
            sc.readable.push(format!("m{k}"));
            sc.writable.push(format!("m{k}"));
        }
        for k in 0..sig.outs {
            sc.outs.push(format!("y{k}"));
        }
        if let Some(len) = sig.out_array {
            sc.arrays.push(Arr { name: "o".into(), len, writable: true, readable: false });
        }
        let mut body = Body {
            rng: &mut *rng,
            sigs: &sigs,
            me: i,
            names: 0,
            calls: 0,
            prints: false,
            effects: cfg.effects,
            covered: Vec::new(),
        };
        let mut text = String::new();
        let stmts = body.rng.random_range(1..=cfg.stmts.max(1));
        body.block(&mut sc, stmts, 2, true, &mut text, true);
        for y in sc.outs.clone() {
            if !body.covered.contains(&y) {
                let e = body.expr(&sc, 2);
                let _ = write!(text, "{y}={e}; ");
            }
        }
        let prints = body.prints;
        sigs[i].prints = prints;
        bodies[i] = text;
    }

    let mut source = String::new();
    for (i, sig) in sigs.iter().enumerate() {
        let mut ins = vec!["int d".to_string()];
        ins.extend((0..sig.ins).map(|k| format!("int x{k}")));
        if let Some(len) = sig.in_array {
            ins.push(format!("int a[{len}]"));
        }
        let inouts: Vec<String> = (0..sig.inouts).map(|k| format!("int m{k}")).collect();
        let mut outs: Vec<String> = (0..sig.outs).map(|k| format!("int y{k}")).collect();
        if let Some(len) = sig.out_array {
            outs.push(format!("int o[{len}]"));
        }
        let effects = if sig.prints { "(;stdout;)" } else { "" };
        let _ = writeln!(source, "r{i}({};{};{}){effects} {{ {}}}", ins.join(", "), inouts.join(", "), outs.join(", "), bodies[i]);
    }

    let s0 = &sigs[0];
    let entry = EntryCall {
        routine: "r0".into(),
        ins: std::iter::once(rng.random_range(1..4)).chain((0..s0.ins).map(|_| rng.random_range(-5..20))).collect(),
        inouts: (0..s0.inouts).map(|k| (format!("m{k}"), rng.random_range(-5..20))).collect(),
        outs: (0..s0.outs).map(|k| format!("y{k}")).collect(),
    };
    Generated { source, entry }
}
