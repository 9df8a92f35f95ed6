import java.io.*;
import java.lang.*;
import java.util.*;
import java.math.*;

class Sum {
    /*@ public normal_behavior
      @ requires n >= 0;
      @ requires n < Integer.MAX_VALUE;
      @ ensures \result >= 0;
      @ ensures n <= 1 ==> \result == 0;
      @*/
    public static int sum(int n) {
        //@ assume n >= 0;
        int[] sumOfPrimeDivisors = new int[n + 1];
        
        //@ assume sumOfPrimeDivisors != null;
        //@ assume sumOfPrimeDivisors.length == n + 1;
        sumOfPrimeDivisors[0] = 0;
        sumOfPrimeDivisors[1] = 0;

        /*@ loop_invariant 2 <= i && i <= n + 1;
          @ loop_invariant \forall int k; 0 <= k && k < i; 
          @     sumOfPrimeDivisors[k] >= 0;
          @ loop_invariant sumOfPrimeDivisors[0] == 0;
          @ loop_invariant sumOfPrimeDivisors[1] == 0;
          @ decreases n - i;
          @*/
        for (int i = 2; i <= n; i++) {
            if (sumOfPrimeDivisors[i] == 0) {
                /*@ loop_invariant j >= i;
                  @ loop_invariant j <= n + i;
                  @ loop_invariant \forall int k; i <= k && k < j && k % i == 0 ==>
                  @     sumOfPrimeDivisors[k] >= i;
                  @ decreases n - j;
                  @*/
                for (int j = i; j <= n; j += i) {
                    //@ assume sumOfPrimeDivisors[j] + i <= Integer.MAX_VALUE;
                    sumOfPrimeDivisors[j] += i;
                }
            }
        }

        //@ assert sumOfPrimeDivisors[n] >= 0;
        return sumOfPrimeDivisors[n];
    }
}
