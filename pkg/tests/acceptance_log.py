LINES: list = []
