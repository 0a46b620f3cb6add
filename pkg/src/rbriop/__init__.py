"""Round-by-round sound IOPs for low-degree codes and R1CS over binary fields."""
