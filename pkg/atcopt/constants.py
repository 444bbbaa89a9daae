"""constants.py -- numerical defaults for AtC coupling runs

- 04/02/26 (dlk): Created, extracted from potential.py and atomistic.py.
- 05/19/26 (dlk): Add outer-loop and conjugate-gradient tolerances.
- 07/08/26 (ams): Add mesh grading defaults.
"""


################################################################
# lattice and interaction range
################################################################

k_dim = 2  # spatial dimension (only d=2 is implemented)

# nearest and next-nearest neighbor offsets on Z^2, in fixed order
k_nn_offsets = ((1, 0), (0, 1), (-1, 0), (0, -1))
k_nnn_offsets = ((1, 1), (-1, 1), (-1, -1), (1, -1))

################################################################
# potential defaults
################################################################

k_morse_stiffness = 4.0      # Morse stiffness a (inverse lattice units)
k_shell_weights = (1.0, 0.1)  # NN, NNN shell weights
k_defect_alpha = 1.2         # bond-strength multiplier on defect sites
k_defect_misfit = 0.05       # relative bond-length misfit on defect sites
k_defect_radius = 0.0        # defect radius M


################################################################
# geometry defaults
################################################################

k_psi_a = 4
k_kappa = 1
k_ladder = (6, 8, 12, 16)
k_analysis_ladder = (4, 8)
k_analysis_kappa = 2          # kappa on the analysis ladder
k_overlap_cut_factor = 4.0   # (psi_a-1) r_core >= k_overlap_cut_factor*r_cut

################################################################
# mesh defaults
################################################################

k_grading_exponent = 1.5
k_min_angle = 20.0           # degrees
k_mesh_retries = 3

################################################################
# solver defaults
################################################################

k_tol_newton = 1e-10
k_max_newton = 50
k_armijo = 1e-4
k_tol_outer = 1e-8
k_tol_J = 1e-20
k_max_outer = 30
k_cg_rtol = 1e-10
k_cg_maxiter = 2000
k_direct_limit = 4_000_000   # largest system factorized directly (DOFs)
k_continuation_stages = 4

################################################################
# analysis and harness defaults
################################################################

k_rank_cutoff = 1e-10        # relative singular-value cutoff for Gram matrices
k_reference_factor = 4
k_fd_step = 1e-5
k_stability_cell = 16
