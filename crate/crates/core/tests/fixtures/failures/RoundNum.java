import java.io.*;
import java.lang.*;
import java.util.*;
import java.math.*;

class RoundNum {
    
    /**
     * @requires m > 0; // The divisor must be positive.
     * @ensures \result >= 0; // The result will be non-negative.
     * @ensures \result % m == 0; // The result is a multiple of m.
     * @ensures \result <= n; // The result will be less than or equal to n.
     * @ensures (\forall int i; \result < i && i <= n; i % m != 0);
     *   // There is no multiple of m between \result and n.
     */
    public static int roundNum(int n, int m) {
        /*@ loop_invariant 
              0 <= i <= n && 
              (\forall int j; i < j && j <= n; j % m != 0)
            // i is non-negative, i is less than or equal to n, and
            // there is no multiple of m between i and n.
          @*/
        for (int i = n; i >= 0; i--) {
            //@ assert i >= 0; // i is non-negative.
            if (i % m == 0) {
                return i;
            }
        }
        //@ assert false; // This code should never be reached.
        return -1;
    }
}
