use alloc::vec::Vec;

use super::hamiltonian::HamiltonianTerms;
use super::operators::strides;
use super::spec::SpinSystemSpec;
use super::species::SpeciesKind;

/// Sites that move together under exchange: an electron and the nuclei
/// hyperfine-coupled to it, ascending.
pub type Unit = Vec<usize>;

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

fn units(spec: &SpinSystemSpec) -> Vec<Unit> {
    let n = spec.sites().len();
    let mut parent: Vec<usize> = (0..n).collect();
    for (k, s) in spec.sites().iter().enumerate() {
        if let Some(hf) = s.hyperfine {
            let (a, b) = (find(&mut parent, k), find(&mut parent, hf.electron));
            parent[a.max(b)] = a.min(b);
        }
    }
    let probe = find(&mut parent, spec.probe_site());
    let mut out: Vec<Unit> = Vec::new();
    let mut root_of: Vec<usize> = Vec::new();
    for k in 0..n {
        let r = find(&mut parent, k);
        if r == probe {
            continue;
        }
        match root_of.iter().position(|&x| x == r) {
            Some(i) => out[i].push(k),
            None => {
                root_of.push(r);
                out.push(alloc::vec![k]);
            }
        }
    }
    out
}

fn shape(spec: &SpinSystemSpec, u: &Unit) -> Vec<SpeciesKind> {
    u.iter().map(|&k| spec.sites()[k].species.kind).collect()
}

/// Basis permutation that exchanges units `a` and `b` site by site.
pub fn swap_permutation(dims: &[usize], a: &[usize], b: &[usize]) -> Vec<usize> {
    let st = strides(dims);
    let n: usize = dims.iter().product();
    (0..n)
        .map(|g| {
            let mut h = g;
            for (&x, &y) in a.iter().zip(b) {
                let (dx, dy) = ((g / st[x]) % dims[x], (g / st[y]) % dims[y]);
                h = h - dx * st[x] - dy * st[y] + dy * st[x] + dx * st[y];
            }
            h
        })
        .collect()
}

/// Classes of mutually exchangeable units, each with at least two members.
///
/// Two units of the same species layout are exchangeable when swapping them
/// leaves every Hamiltonian term unchanged. The unit holding the probe never
/// takes part.
pub fn exchange_classes(spec: &SpinSystemSpec, terms: &HamiltonianTerms) -> Vec<Vec<Unit>> {
    let mut classes: Vec<Vec<Unit>> = Vec::new();
    for u in units(spec) {
        let joined = classes.iter_mut().find(|c| {
            shape(spec, &c[0]) == shape(spec, &u)
                && terms.invariant_under(&swap_permutation(terms.dims(), &c[0], &u))
        });
        match joined {
            Some(c) => c.push(u),
            None => classes.push(alloc::vec![u]),
        }
    }
    classes.retain(|c| c.len() > 1);
    classes
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::get_system;

    #[test]
    fn identical_p1_units_are_exchangeable() {
        let spec = get_system("nv-3p1").unwrap().spec;
        let terms = HamiltonianTerms::new(&spec).unwrap();
        let c = exchange_classes(&spec, &terms);
        assert_eq!(c, alloc::vec![alloc::vec![alloc::vec![1, 2], alloc::vec![3, 4], alloc::vec![5, 6]]]);
        let single = get_system("nv-p1").unwrap().spec;
        assert!(exchange_classes(&single, &HamiltonianTerms::new(&single).unwrap()).is_empty());
    }

    #[test]
    fn swap_is_an_involution() {
        let dims = [3, 2, 3, 2, 3];
        let p = swap_permutation(&dims, &[1, 2], &[3, 4]);
        for (g, &h) in p.iter().enumerate() {
            assert_eq!(p[h], g);
        }
        assert_eq!(p.iter().filter(|&&h| h == 0).count(), 1);
    }
}
