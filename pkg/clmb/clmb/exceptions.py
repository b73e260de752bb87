class NumericalError(ArithmeticError):
    """
    Нечисловое значение (NaN/Inf) в активациях или функции потерь,
    либо вырожденная калибровка весов.
    Команды переводят его в код выхода 3.
    """
    pass
