public int theMaximumAchievableX(int num, int t) {
  int res = num;
  for(int i = 1; i <= t; i++) {
    res = res + 2;
  }
  return res;
}
