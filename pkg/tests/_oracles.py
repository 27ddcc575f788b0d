"""Reference values frozen from independent closed forms (mpmath, 40 digits).

Each constant is re-derived in ``test_oracles.py`` when mpmath is present.
"""

# Jacobi theta_3(0, e^{-pi a}) and the closed form pi^{1/4} / Gamma(3/4)
THETA_Z = {
    0.3: 1.8258452649338946025,
    0.5: 1.4194954880837661234,
    1.0: 1.0864348112133080146,
    2.0: 1.003734885487739091,
    3.0: 1.000161399035140694,
}
THETA_Z2_1 = 1.180340599016096226
# (theta_2^8 + theta_3^8 + theta_4^8) / 2 at q = e^{-pi a}
THETA_E8 = {0.5: 16.013391814955802547, 1.0: 1.4557628922687093225, 2.0: 1.0008369884347376592}
# double nsum over m^2 + mn + n^2 scaled to covolume 1
THETA_TRI_1 = 1.1595952669639283658

ZETA_Z_2 = 3.2898681336964528729  # pi^2 / 3
# 4 zeta(s/2) beta(s/2), beta the Dirichlet beta function
ZETA_Z2 = {3: 9.0336216831009503057, 4: 6.0268120396919401235, 5: 5.0902582336654829457}
# (2/sqrt 3)^(-s/2) 6 zeta(s/2) L(s/2, chi_-3)
ZETA_TRI = {3: 8.8927451003972907667, 4: 5.7833592996786723131, 5: 4.7194917176705616599}

ETA_1 = 0.768225422326056659  # Gamma(1/4) / (2 pi^{3/4})
ETA_2 = 0.59238278133241588529  # Gamma(1/4) / (2^{11/8} pi^{3/4})

# -(1 / 2 pi) sum_n (m / n) K_1(2 pi m n)
DELTA_Z = {0.5: -0.0027389558169783006251, 1.0: -0.00015718637887606716778, 2.0: -4.0390318185579655031e-7}
# -(1 / 8 pi) sum_{y != 0} 2 (m/|y|)^{3/2} K_{3/2}(2 pi m |y|), |y_i| <= 12
DELTA_Z2_1 = -0.00035696801998870909751

# psi_e(r) = e^r / Gamma(r + 1)
PSI_E = {1: 2.7182818284590452354, 2: 3.6945280494653251136, 4: 2.2749229180476766283}
