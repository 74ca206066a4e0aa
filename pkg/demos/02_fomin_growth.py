"""Fomin growth diagram of 3 5 1 4 2, its inverse map, and Knuth classes."""
from permuton_rs.fomin import (fomin_direct, fomin_distance_bound, fomin_inverse, knuth_class, phi_continuous,
                               phi_discrete, reconstruct_permutation)

grid = fomin_direct((3, 5, 1, 4, 2))
print(grid.render())
words = grid.rectangle_words(1, 5, 2, 5)
print("rectangle words", words)
print("F(top, right) =", fomin_inverse(words["top"], words["right"]))

# the top and right borders determine the whole diagram
print("rebuilt", reconstruct_permutation(grid.north_word(), grid.east_word()))

# Knuth-equivalent words cannot be told apart by any applied word
cls = sorted(knuth_class((2, 1, 3, 1)))
print("Knuth class of 2131:", cls)
print("dist_F bound inside the class:", max(fomin_distance_bound(cls[0], u, 3, 3) for u in cls))
print("dist_F bound 21 vs 12:", fomin_distance_bound((2, 1), (1, 2), 2, 2))

# phi from the inverse map, and its continuous extension
print("phi((2,1),(1,2)) =", phi_discrete((2, 1), (1, 2)), phi_continuous((2, 1), (1, 2)))
