"""Certified p-adic decomposition of Weierstrass mock modular forms.

For a weight-2 rational CM newform g and an inert prime p >= 5 of good
reduction, the library computes the constant alpha_g attached to the mock
modular form with shadow g by two independent routes (q-series shadow
decomposition and crystalline decomposition in the formal-group coordinate)
and certifies the structural facts behind it: Honda types, integrality of
the formal-group isomorphism, lambda_p = 0 and v_p(C_g * alpha_g) = 0.
"""

__version__ = "0.1.0"
