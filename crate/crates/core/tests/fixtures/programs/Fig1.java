//@ requires num >= 0 && t >= 0;
//@ requires num + 2*t <= Integer.MAX_VALUE;
//@ requires num + 2*t >= Integer.MIN_VALUE;
//@ ensures \result == num + 2*t;
public int theMaximumAchievableX(int num, int t) {
  int res = num;
  //@ maintaining res == num + 2*(i-1);
  //@ maintaining i >= 1 && i <= t+1;
  //@ decreasing t-i+1;
  for(int i = 1; i <= t; i++) {
    res = res + 2;
  }
  return res;
}
