//! Text for `lrcone list` and `lrcone describe`.

use crate::config::ExperimentKind;

pub fn summary(kind: ExperimentKind) -> &'static str {
    match kind {
        ExperimentKind::Particle => "particle propagation bound: ball moments inside the cone v|t| <= R - r",
        ExperimentKind::Lr => "state-dependent Lieb-Robinson bound: τ_t vs τ^R_t in trace norm",
        ExperimentKind::Commutator => "commutator light cone for full and truncated (bounded-interaction) dynamics",
        ExperimentKind::Ladder => "five-step decomposition of the Lieb-Robinson difference through the truncation",
        ExperimentKind::Verify => "exact identities, cutoff geometry and propagator consistency suites",
    }
}

pub fn describe(kind: ExperimentKind) -> &'static str {
    match kind {
        ExperimentKind::Particle => "\
particle: bound on particle transport.

For a velocity v > 2d|J| and delta0 in (0, 1), the moment Tr[N_{B_r(x)}^eta rho(t)]
is controlled by the initial moment Tr[N_{B_R(x)}^eta rho] plus a term decaying like a
power of (R - r), as long as v|t| <= R - r and R - r >= max(1, delta0 r). Particles
move no faster than any v above 2d|J|, up to power-law tails.

Records: flag=ok for evaluated grid points, outside_regime for grid points violating
v|t| <= R - r or the gap condition, initial_outer for the t = 0 moment at radius R,
tail for the weight outside B_R(x), site for single-site occupations.
The sidecar reports a front-speed fit of the tail records.

Config table [particle]: x, eta, v, delta0, r, big_r, t, tail_radii, tail_times,
site_times, front_threshold.",
        ExperimentKind::Lr => "\
lr: state-dependent Lieb-Robinson bound.

For a bounded, number-conserving observable A supported on X and a state rho with
controlled local density, the full dynamics τ_t and the dynamics τ^R_t generated by
H restricted to X[R] = {y : dist(y, X) <= R} agree on ρ up to a small error:
the trace norm ‖(τ_t(A) - τ^R_t(A)) ρ‖₁ decays in R inside a light cone
whose radius grows polynomially in |t|.

Records: value is the trace norm above at (R, t); flag=small_radius marks R <= 2.
The observable is Pi_{X,nu} N_X Pi_{X,nu} when nu_a is set, N_X otherwise.

Config table [lr]: x, nu_a, big_r, t.",
        ExperimentKind::Commutator => "\
commutator: Lieb-Robinson bound for commutators.

Reports the operator norm ||[tau_t(A), B]|| for A = n_a and B = n_b at each site b,
and, when nu is set, the same quantity for the truncated Hamiltonian
Hbar = Pi H Pi with Pi = Pi_{Lambda,nu}. The truncated dynamics has bounded
interactions, so its commutators decay exponentially in the separation at fixed t.

Records: flag=full or truncated; R holds the separation between the supports.

Config table [commutator]: a, b (list of sites), t, nu.",
        ExperimentKind::Ladder => "\
ladder: decomposition of the Lieb-Robinson difference.

Splits tau_t(A) - tau^R_t(A) into five steps: truncate A, switch to the truncated
dynamics, restrict it to X[R], undo the dynamics truncation, undo the observable
truncation, with Pi = Pi_{X[R+2],nu}. Each step is measured as a trace norm against
rho. The first and last steps shrink as nu grows.

Records: flag=term1..term5, ladder_sum and ladder_direct (the lr value).

Config table [ladder]: x, nu_a, big_r, nu (list), t.",
        ExperimentKind::Verify => "\
verify: invariant suites.

Hermiticity and number conservation of H, the commutator expansion of [H, dGamma(g)]
for random g, projector complements, invariance of the complement under the truncated
dynamics, commutation of truncated observables with disjoint supports, the cutoff
sandwich and the geometric bounds of the adiabatic operator, the order of the
symmetrized expansion residual, Krylov vs dense propagation, unitarity, the group
law and the interaction-picture equation.

Exit status 4 if any check fails. Config table [verify]: random_functions.",
    }
}
