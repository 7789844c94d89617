"""Cross-checking the frequency-domain verdicts in the time domain.

Simulates the averaged converter below, at, and above the critical PLL
bandwidth, classifies each response, and decomposes the oscillating
current into sequence components.  Run: python demos/time_domain_verification.py
(takes ~20 s: three multi-second nonlinear runs)
"""

from dataclasses import replace

from vscstab import (
    Case,
    SimConfig,
    build_case,
    classify_trace,
    critical,
    sequence_spectrum,
    simulate,
)

case = Case()
crit = critical(case, "pll_bw", 10.0, 25.0)
print(f"critical PLL bandwidth: {crit:.2f} Hz\n")

for mult, t_end in ((0.8, 3.0), (1.0, 6.0), (1.5, 3.0), (2.3, 6.0)):
    bw = mult * crit
    params, op = build_case(replace(case, pll_bw=bw))
    trace = simulate(params, op, SimConfig(t_end=t_end))
    label = classify_trace(trace)
    line = f"pll_bw = {bw:5.1f} Hz ({mult}x critical): {label:9s}"
    if trace.diverged:
        line += f"  (current tripped 10 pu at t = {trace.trip_time:.2f} s)"
    else:
        try:
            spec = sequence_spectrum(trace, window=2.5)
            line += (f"  osc {spec.osc_freq:5.1f} Hz, "
                     f"I_p {spec.i_p_mag:.4f} pu, I_n {spec.i_n_mag:.4f} pu, "
                     f"f_u {spec.f_u:.2f}")
        except Exception:
            line += "  (oscillation fully decayed; no spectrum)"
    print(line)

print("\nthe sustained case oscillates at the loop-impedance resonance, and")
print("the unbalance f_u (negative- over positive-sequence current) grows")
print("with the PLL bandwidth: the coupling between sequences strengthens.")
