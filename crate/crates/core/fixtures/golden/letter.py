# Grade helpers.

def letter(score):
    """Map a score to a letter."""
    if score >= 90:
        return "A"
    elif score >= 80:
        return "B"
    return "C"
